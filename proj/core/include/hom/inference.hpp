#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hom/analytic.hpp"
#include "hom/config.hpp"
#include "hom/correlator.hpp"
#include "hom/params.hpp"

namespace hom::inference {

struct VisibilityPoint {
  double ratio = 0.0;  // η/α²
  double visibility = 0.0;
  double sigma = 0.0;
};

struct GammaFit {
  double gamma_hat = 0.0;
  double gamma_stderr = 0.0;
  double chi2 = 0.0;
  double chi2_per_dof = 0.0;
  bool at_boundary = false;  // γ̂ pinned at 0 or 1
};

struct VisibilityCurve {
  std::vector<VisibilityPoint> points;
  std::optional<GammaFit> fit;
};

/// One-parameter weighted least squares of visibility_convolved(r; γ) over γ ∈ [0, 1];
/// τ_coh, τ_rad, b and the detector response stay fixed.
/// Throws ValidationError for < 3 points, non-positive ratios or sigmas.
GammaFit fit_gamma(std::span<const VisibilityPoint> points, const QuantumSourceParams& q,
                   const CoherentSourceParams& c, const DetectorResponse& d,
                   const analytic::ModelOptions& opts = {});

struct Optimum {
  double ratio_star = 0.0;
  double v_max = 0.0;
  bool at_boundary = false;  // maximum sits at the search limit (monotone curve)
};

inline constexpr double kMaxSearchRatio = 100.0;

/// Ratio η/α² in (0, 100] that maximises the convolved visibility (golden section in log r).
Optimum predict_optimum(const QuantumSourceParams& q, const CoherentSourceParams& c,
                        const InterferenceConfig& ic, const DetectorResponse& d,
                        const analytic::ModelOptions& opts = {});

/// CSV `ratio,visibility,sigma`.
std::vector<VisibilityPoint> read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, std::span<const VisibilityPoint> points);

// ---------------------------------------------------------------------------
// Synthetic measurement pipeline: Monte Carlo → correlator → dip fit → points.

struct PipelineOptions {
  double total_rate_per_ps = 4e-5;  // dot + laser detected rate
  double duration_ps = 2e10;
  double bin_width_ps = 64.0;
  double max_tau_ps = 6400.0;
  std::uint64_t seed = 1;
  unsigned segments = 1;
};

/// Parallel and orthogonal histograms measured at one intensity ratio.
struct PairedHistograms {
  double ratio = 0.0;
  corr::CorrelationHistogram parallel;
  corr::CorrelationHistogram orthogonal;
};

/// Simulates φ = 0 and φ = 90° runs at the given ratio; cfg supplies the true γ,
/// source and detector parameters. Seeds are derived from opts.seed, the ratio
/// index and the polarization.
PairedHistograms simulate_pair(const ModelConfig& cfg, double ratio, std::size_t ratio_index,
                               const PipelineOptions& opts);

/// Visibility of a histogram pair, fitting each setting with the convolved model
/// built from cfg with overlap `model_gamma`.
VisibilityPoint measure_visibility(const PairedHistograms& pair, const ModelConfig& cfg,
                                   double model_gamma);

/// Extracts points with model_gamma = 1, fits γ, then re-extracts with the fitted
/// γ and refits (`refinements` times) so the dip shape used for g²(0) is consistent.
VisibilityCurve infer_gamma(std::span<const PairedHistograms> pairs, const ModelConfig& cfg,
                            int refinements = 2);

}  // namespace hom::inference
