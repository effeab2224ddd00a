#include "hom/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "hom/error.hpp"
#include "hom/special.hpp"

namespace hom::analytic {
namespace {

void require_ratio(double ratio) {
  if (!(ratio >= 0.0)) throw ValidationError("intensity ratio must be >= 0");
}

double exp_term(double tau, double decay, const DetectorResponse& d, bool convolved) {
  if (!convolved || d.pair_fwhm() == 0.0) return std::exp(-std::abs(tau) / decay);
  return special::exp_gauss_conv(tau, decay, d.pair_sigma());
}

// ∫_{u0}^{u1} (a + b·u)·g(c − u) du for g the N(0, σ²) density.
double linear_gauss_integral(double a, double b, double c, double u0, double u1, double sigma) {
  const double v0 = c - u1;
  const double v1 = c - u0;
  const double pdf_norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  const auto pdf = [&](double v) { return pdf_norm * std::exp(-0.5 * (v / sigma) * (v / sigma)); };
  const double mass = special::normal_cdf(v1 / sigma) - special::normal_cdf(v0 / sigma);
  const double first_moment = sigma * sigma * (pdf(v0) - pdf(v1));
  return (a + b * c) * mass - b * first_moment;
}

}  // namespace

double g2_parallel_ideal(double ratio) {
  require_ratio(ratio);
  const double s = 1.0 + ratio;
  return 1.0 / (s * s);
}

double g2_orthogonal_ideal(double ratio) {
  require_ratio(ratio);
  const double s = 1.0 + ratio;
  return (1.0 + 2.0 * ratio) / (s * s);
}

double visibility_ideal(double ratio) {
  require_ratio(ratio);
  return 2.0 * ratio / (1.0 + 2.0 * ratio);
}

double hbt_dot_ideal(double tau_ps, const QuantumSourceParams& q) {
  const double signal = 1.0 - q.background_fraction();
  return 1.0 - signal * signal * std::exp(-std::abs(tau_ps) / q.tau_rad());
}

double hbt_dot_convolved(double tau_ps, const QuantumSourceParams& q, const DetectorResponse& d) {
  const double signal = 1.0 - q.background_fraction();
  return 1.0 - signal * signal * exp_term(tau_ps, q.tau_rad(), d, true);
}

double interference_decay_time(const QuantumSourceParams& q, const CoherentSourceParams& c,
                               const ModelOptions& opts) {
  if (!opts.include_laser_coherence) return q.tau_coh();
  return 1.0 / (1.0 / q.tau_coh() + 1.0 / c.tau_coh_laser());
}

double g2_full(double tau_ps, const QuantumSourceParams& q, const CoherentSourceParams& c,
               const InterferenceConfig& ic, const DetectorResponse& d, bool convolved,
               const BeamSplitter& splitter, const ModelOptions& opts) {
  if (!splitter.balanced()) {
    throw UnsupportedSplitterError("two-source correlation model requires R = T");
  }
  const double eta = q.eta();
  const double a2 = c.alpha_sq();
  const double total = eta + a2;
  if (!(total > 0.0)) throw ValidationError("eta + alpha_sq must be > 0");

  const double signal = 1.0 - q.background_fraction();
  const double coherence = exp_term(tau_ps, interference_decay_time(q, c, opts), d, convolved);
  const double hbt = 1.0 - signal * signal * exp_term(tau_ps, q.tau_rad(), d, convolved);

  const double cross = 2.0 * eta * a2 * (1.0 - ic.overlap_weight() * coherence);
  return (cross + eta * eta * hbt + a2 * a2) / (total * total);
}

double visibility_convolved(double ratio, const QuantumSourceParams& q,
                            const CoherentSourceParams& c, const InterferenceConfig& ic,
                            const DetectorResponse& d, const ModelOptions& opts) {
  require_ratio(ratio);
  const double hbt0 = hbt_dot_convolved(0.0, q, d);
  const double coherence0 = exp_term(0.0, interference_decay_time(q, c, opts), d, true);
  // Both settings share the (1 + r)² normalisation, which cancels.
  const double orthogonal = 2.0 * ratio + ratio * ratio * hbt0 + 1.0;
  return 2.0 * ratio * ic.overlap_weight() * coherence0 / orthogonal;
}

std::vector<double> symmetric_grid(double half_span_ps, double step_ps) {
  if (!(step_ps > 0.0) || !(half_span_ps >= 0.0)) {
    throw ValidationError("grid needs step > 0 and half span >= 0");
  }
  const auto n = static_cast<long>(std::ceil(half_span_ps / step_ps - 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(2 * n + 1));
  for (long k = -n; k <= n; ++k) grid.push_back(static_cast<double>(k) * step_ps);
  return grid;
}

double default_grid_step(const QuantumSourceParams& q, const DetectorResponse& d) {
  double shortest = std::min(q.tau_coh(), q.tau_rad());
  if (d.pair_fwhm() > 0.0) shortest = std::min(shortest, d.pair_fwhm());
  return shortest / 64.0;
}

double default_half_span(const QuantumSourceParams& q, const DetectorResponse& d) {
  return 10.0 * (q.tau_coh() + q.tau_rad() + d.pair_fwhm());
}

CorrelationCurve hbt_curve(std::span<const double> grid, const QuantumSourceParams& q,
                           const DetectorResponse& d, bool convolved) {
  CorrelationCurve curve;
  curve.tau.assign(grid.begin(), grid.end());
  curve.values.reserve(grid.size());
  for (const double t : grid) {
    curve.values.push_back(convolved ? hbt_dot_convolved(t, q, d) : hbt_dot_ideal(t, q));
  }
  curve.convolved = convolved;
  curve.config.tau_coh_ps = q.tau_coh();
  curve.config.tau_rad_ps = q.tau_rad();
  curve.config.background_fraction = q.background_fraction();
  curve.config.pair_fwhm_ps = d.pair_fwhm();
  curve.config.dark_rate_per_ps = d.dark_rate();
  return curve;
}

CorrelationCurve g2_full_curve(std::span<const double> grid, const ModelConfig& cfg,
                               bool convolved, const ModelOptions& opts) {
  const auto q = cfg.quantum();
  const auto c = cfg.coherent();
  const auto ic = cfg.interference();
  const auto d = cfg.detector();
  const auto bs = cfg.splitter();

  CorrelationCurve curve;
  curve.tau.assign(grid.begin(), grid.end());
  curve.values.reserve(grid.size());
  for (const double t : grid) {
    curve.values.push_back(g2_full(t, q, c, ic, d, convolved, bs, opts));
  }
  curve.convolved = convolved;
  curve.config = cfg;
  return curve;
}

CorrelationCurve convolve_response(const CorrelationCurve& curve, const DetectorResponse& d) {
  if (curve.tau.size() != curve.values.size()) {
    throw ValidationError("curve grid and values differ in length");
  }
  CorrelationCurve out = curve;
  out.convolved = true;
  out.config.pair_fwhm_ps = d.pair_fwhm();
  if (d.pair_fwhm() == 0.0 || curve.tau.size() < 2) return out;

  const std::size_t n = curve.tau.size();
  const double step = (curve.tau.back() - curve.tau.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(curve.tau[i] - curve.tau[i - 1] - step) > 1e-6 * step) {
      throw ValidationError("convolve_response requires a uniform grid");
    }
  }
  if (step > d.pair_fwhm() / 8.0) {
    throw GridTooCoarseError("grid step exceeds FWHM/8 of the detector response");
  }

  const double sigma = d.pair_sigma();
  const auto reach = static_cast<long>(std::ceil(8.5 * sigma / step)) + 1;
  std::vector<double> weights(static_cast<std::size_t>(2 * reach + 1));
  double weight_sum = 0.0;
  for (long m = -reach; m <= reach; ++m) {
    const double c = static_cast<double>(m) * step;
    // Hat function of half-width `step` centred on the sample.
    const double w = linear_gauss_integral(1.0, 1.0 / step, c, -step, 0.0, sigma) +
                     linear_gauss_integral(1.0, -1.0 / step, c, 0.0, step, sigma);
    weights[static_cast<std::size_t>(m + reach)] = w;
    weight_sum += w;
  }
  for (auto& w : weights) w /= weight_sum;

  const auto last = static_cast<long>(n) - 1;
  for (long i = 0; i <= last; ++i) {
    double acc = 0.0;
    for (long m = -reach; m <= reach; ++m) {
      const long k = std::clamp(i - m, 0L, last);
      acc += weights[static_cast<std::size_t>(m + reach)] * curve.values[static_cast<std::size_t>(k)];
    }
    out.values[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

double interpolate(const CorrelationCurve& curve, double tau_ps) {
  const auto& x = curve.tau;
  if (x.empty()) throw ValidationError("cannot interpolate an empty curve");
  if (tau_ps <= x.front()) return curve.values.front();
  if (tau_ps >= x.back()) return curve.values.back();
  const auto it = std::upper_bound(x.begin(), x.end(), tau_ps);
  const auto hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double f = (tau_ps - x[lo]) / (x[hi] - x[lo]);
  return curve.values[lo] + f * (curve.values[hi] - curve.values[lo]);
}

void write_curve_csv(std::ostream& out, const CorrelationCurve& curve) {
  const auto old_precision = out.precision(9);
  out << "tau_ps,g2\n";
  for (std::size_t i = 0; i < curve.tau.size(); ++i) {
    out << curve.tau[i] << ',' << curve.values[i] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hom::analytic
