#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "hom/config.hpp"
#include "hom/params.hpp"

namespace hom::analytic {

/// g²(τ) sampled on an ordered τ grid (ps).
struct CorrelationCurve {
  std::vector<double> tau;
  std::vector<double> values;
  bool convolved = false;
  ModelConfig config;  // parameters the curve was generated from
};

// Zero-delay correlations for an ideal (instantaneous, background-free) dot
// interfering with a weak laser, as functions of the ratio r = η/α².
double g2_parallel_ideal(double ratio);
double g2_orthogonal_ideal(double ratio);
// (g⊥ − g∥)/g⊥ = 2r/(1+2r).
double visibility_ideal(double ratio);

/// Dot autocorrelation 1 − (1−b)²·exp(−|τ|/τ_rad).
double hbt_dot_ideal(double tau_ps, const QuantumSourceParams& q);

/// hbt_dot_ideal convolved with the pair response, in closed form.
double hbt_dot_convolved(double tau_ps, const QuantumSourceParams& q, const DetectorResponse& d);

struct ModelOptions {
  // Use 1/τ_eff = 1/τ_coh,dot + 1/τ_coh,laser in the interference term instead of
  // treating the laser as perfectly coherent.
  bool include_laser_coherence = false;
};

double interference_decay_time(const QuantumSourceParams& q, const CoherentSourceParams& c,
                               const ModelOptions& opts = {});

/// Full two-source correlation g²_φ(τ) for a balanced splitter, optionally
/// convolved with the detector response (closed form per exponential term).
/// Throws UnsupportedSplitterError if R ≠ T and ValidationError if η + α² = 0.
double g2_full(double tau_ps, const QuantumSourceParams& q, const CoherentSourceParams& c,
               const InterferenceConfig& ic, const DetectorResponse& d, bool convolved,
               const BeamSplitter& splitter = BeamSplitter(0.5), const ModelOptions& opts = {});

/// Convolved zero-delay visibility (g⊥(0) − g∥(0))/g⊥(0) at ratio r. Only q's
/// time constants and background fraction are used; η and α² are replaced by r.
double visibility_convolved(double ratio, const QuantumSourceParams& q,
                            const CoherentSourceParams& c, const InterferenceConfig& ic,
                            const DetectorResponse& d, const ModelOptions& opts = {});

// Symmetric grid -n·step … n·step with τ = 0 at the centre.
std::vector<double> symmetric_grid(double half_span_ps, double step_ps);

// Grid step that resolves every time constant involved: min(FWHM, τ...)/64.
double default_grid_step(const QuantumSourceParams& q, const DetectorResponse& d);

// Half span 10·(τ_coh + τ_rad + FWHM), past which every model curve is flat.
double default_half_span(const QuantumSourceParams& q, const DetectorResponse& d);

CorrelationCurve hbt_curve(std::span<const double> grid, const QuantumSourceParams& q,
                           const DetectorResponse& d, bool convolved);

CorrelationCurve g2_full_curve(std::span<const double> grid, const ModelConfig& cfg,
                               bool convolved, const ModelOptions& opts = {});

/// Numerical convolution of a uniformly sampled curve with the unit-area
/// Gaussian pair response. The curve is treated as piecewise linear between
/// samples and held constant beyond its ends. FWHM = 0 returns the input.
/// Throws GridTooCoarseError when the grid step exceeds FWHM/8.
CorrelationCurve convolve_response(const CorrelationCurve& curve, const DetectorResponse& d);

// Linear interpolation, clamped at the ends.
double interpolate(const CorrelationCurve& curve, double tau_ps);

/// CSV `tau_ps,g2`, 9 significant digits.
void write_curve_csv(std::ostream& out, const CorrelationCurve& curve);

}  // namespace hom::analytic
