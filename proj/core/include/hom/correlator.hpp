#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hom/analytic.hpp"
#include "hom/mc.hpp"

namespace hom::corr {

/// Binned D2→D3 delay histogram, τ = t(D3) − t(D2). Bins are centred on
/// k·bin_width for k = −K…K so τ = 0 is the centre of bin K.
struct CorrelationHistogram {
  std::vector<double> bin_edges;  // size bins + 1
  std::vector<std::uint64_t> counts;
  std::vector<double> normalized;  // counts / accidental_level
  std::vector<double> sigma;       // √counts / accidental_level
  double accidental_level = 0.0;   // expected uncorrelated counts per bin
  double bin_width = 0.0;
  double duration_ps = 0.0;
  std::uint64_t n_start = 0;  // D2 clicks
  std::uint64_t n_stop = 0;   // D3 clicks

  std::size_t size() const noexcept { return counts.size(); }
  std::size_t center_index() const noexcept { return counts.size() / 2; }
  double bin_center(std::size_t i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
  std::uint64_t total_counts() const;
};

inline constexpr double kMaxBinsPerSide = 1e6;

/// Multi-stop cross-correlation of two sorted time lists. `threads` = 0 uses the
/// hardware concurrency; the result does not depend on it.
/// Throws EmptyChannelError if either list is empty, ValidationError for a bad
/// bin width or more than 10⁶ bins per side.
CorrelationHistogram correlate_times(std::span<const double> start, std::span<const double> stop,
                                     double duration_ps, double bin_width_ps, double max_tau_ps,
                                     unsigned threads = 0);

CorrelationHistogram correlate(const mc::TimestampStream& s, double bin_width_ps,
                               double max_tau_ps, unsigned threads = 0);

/// Single-channel autocorrelation: all ordered pairs i ≠ j.
CorrelationHistogram autocorrelate(std::span<const double> times, double duration_ps,
                                   double bin_width_ps, double max_tau_ps, unsigned threads = 0);

struct Visibility {
  double value = 0.0;
  double sigma = 0.0;
};

/// (g⊥(0) − g∥(0)) / g⊥(0) with first-order error propagation, assuming the
/// two measurements are independent.
Visibility visibility_from(double g_par, double s_par, double g_perp, double s_perp);

struct DipStatistics {
  double g2_zero = 0.0;  // fitted g²(0), relative to the uncorrelated baseline
  double g2_zero_stderr = 0.0;
  double baseline = 0.0;  // fitted accidental-level correction (≈ 1)
  double depth_scale = 0.0;  // fitted dip depth relative to the model's (≈ 1)
  double chi2 = 0.0;
  double dof = 0.0;
  double chi2_per_dof = 0.0;
  int iterations = 0;
  std::optional<Visibility> visibility_vs;
};

/// Fits baseline·(1 − depth·(1 − m(τ))) to the histogram, m being the model curve
/// averaged over each bin, with Poisson weights taken from the fitted prediction.
/// g2_zero = 1 − depth·(1 − m(0)). A structureless model degenerates to a
/// baseline-only fit with g2_zero read from the τ = 0 bin.
/// Throws ValidationError when fewer than 10 bins or the model does not cover the
/// histogram, NonConvergenceError if the reweighting does not settle.
DipStatistics dip_statistics(const CorrelationHistogram& h, const analytic::CorrelationCurve& model);

/// Fits both polarization settings and attaches the visibility to the result.
DipStatistics dip_statistics(const CorrelationHistogram& h_parallel,
                             const analytic::CorrelationCurve& model_parallel,
                             const CorrelationHistogram& h_orthogonal,
                             const analytic::CorrelationCurve& model_orthogonal);

/// Reduced χ² of the histogram against a model with no free parameters, using
/// model-based Poisson variances and skipping bins whose expectation is < 5.
struct ModelComparison {
  double chi2 = 0.0;
  double dof = 0.0;
  double chi2_per_dof = 0.0;
};
ModelComparison compare_to_model(const CorrelationHistogram& h,
                                 const analytic::CorrelationCurve& model);

// Model averaged over a bin (Simpson rule on the linearly interpolated curve).
double bin_average(const analytic::CorrelationCurve& model, double lo, double hi);

/// CSV `tau_ps,counts,g2,sigma`.
void write_histogram_csv(std::ostream& out, const CorrelationHistogram& h);
/// Side-car text block: rates, duration, normalisation.
void write_histogram_metadata(std::ostream& out, const CorrelationHistogram& h);

}  // namespace hom::corr
