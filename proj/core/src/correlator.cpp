#include "hom/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "hom/error.hpp"

namespace hom::corr {
namespace {

struct Binning {
  long half_bins;  // K
  double width;
};

Binning make_binning(double bin_width_ps, double max_tau_ps) {
  if (!(bin_width_ps > 0.0) || !std::isfinite(bin_width_ps)) {
    throw ValidationError("bin width must be finite and > 0");
  }
  if (!(max_tau_ps >= bin_width_ps) || !std::isfinite(max_tau_ps)) {
    throw ValidationError("max_tau must be >= bin width");
  }
  if (max_tau_ps / bin_width_ps > kMaxBinsPerSide) {
    throw ValidationError("max_tau / bin width exceeds 1e6 bins");
  }
  return {static_cast<long>(std::llround(max_tau_ps / bin_width_ps)), bin_width_ps};
}

// Bin index uses round-half-away-from-zero on τ/w, which is odd-symmetric, so
// swapping the channels mirrors the histogram exactly.
void sweep(std::span<const double> start, std::span<const double> stop, std::size_t begin,
           std::size_t end, const Binning& bins, bool exclude_self,
           std::vector<std::uint64_t>& counts) {
  const double reach = static_cast<double>(bins.half_bins + 1) * bins.width;
  const double k = static_cast<double>(bins.half_bins);
  auto lo = std::lower_bound(stop.begin(), stop.end(), start[begin] - reach);
  for (std::size_t i = begin; i < end; ++i) {
    const double t = start[i];
    while (lo != stop.end() && *lo < t - reach) ++lo;
    for (auto it = lo; it != stop.end(); ++it) {
      const double dt = *it - t;
      if (dt > reach) break;
      if (exclude_self && static_cast<std::size_t>(it - stop.begin()) == i) continue;
      const double r = std::round(dt / bins.width);
      if (std::abs(r) <= k) ++counts[static_cast<std::size_t>(r + k)];
    }
  }
}

CorrelationHistogram correlate_impl(std::span<const double> start, std::span<const double> stop,
                                    double duration_ps, double bin_width_ps, double max_tau_ps,
                                    unsigned threads, bool exclude_self) {
  const Binning bins = make_binning(bin_width_ps, max_tau_ps);
  if (start.empty() || stop.empty()) {
    throw EmptyChannelError("cannot correlate: a channel has no clicks");
  }
  if (!(duration_ps > 0.0)) throw ValidationError("duration must be > 0");
  if (!std::is_sorted(start.begin(), start.end()) || !std::is_sorted(stop.begin(), stop.end())) {
    throw ValidationError("click times must be sorted");
  }

  const auto nbins = static_cast<std::size_t>(2 * bins.half_bins + 1);
  CorrelationHistogram h;
  h.bin_width = bins.width;
  h.duration_ps = duration_ps;
  h.n_start = start.size();
  h.n_stop = stop.size();
  h.bin_edges.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i) {
    h.bin_edges[i] = (static_cast<double>(i) - static_cast<double>(bins.half_bins) - 0.5) * bins.width;
  }

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, start.size() / 4096)));
  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(nbins, 0));
  const auto chunk = (start.size() + threads - 1) / threads;
  {
    std::vector<std::jthread> pool;
    for (unsigned p = 0; p < threads; ++p) {
      const std::size_t b = p * chunk;
      const std::size_t e = std::min(start.size(), b + chunk);
      if (b >= e) break;
      if (threads == 1) {
        sweep(start, stop, b, e, bins, exclude_self, partial[p]);
      } else {
        pool.emplace_back([&, b, e, p] { sweep(start, stop, b, e, bins, exclude_self, partial[p]); });
      }
    }
  }
  h.counts.assign(nbins, 0);
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < nbins; ++i) h.counts[i] += part[i];
  }

  const double n_pairs = exclude_self ? static_cast<double>(start.size()) * static_cast<double>(start.size() - 1)
                                      : static_cast<double>(start.size()) * static_cast<double>(stop.size());
  h.accidental_level = n_pairs * bins.width / duration_ps;
  h.normalized.resize(nbins);
  h.sigma.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    const auto c = static_cast<double>(h.counts[i]);
    h.normalized[i] = c / h.accidental_level;
    h.sigma[i] = std::sqrt(c) / h.accidental_level;
  }
  return h;
}

// Weighted linear least squares for y = b0 + b1·x with weights w; returns
// (b0, b1) and the covariance entries.
struct LinearFit {
  double b0, b1, v00, v01, v11;
};

LinearFit weighted_line(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w) {
  double s = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += w[i];
    sx += w[i] * x[i];
    sxx += w[i] * x[i] * x[i];
    sy += w[i] * y[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(std::abs(det) > 1e-300)) throw NonConvergenceError("dip fit is singular");
  return {(sxx * sy - sx * sxy) / det, (s * sxy - sx * sy) / det, sxx / det, -sx / det, s / det};
}

}  // namespace

std::uint64_t CorrelationHistogram::total_counts() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

CorrelationHistogram correlate_times(std::span<const double> start, std::span<const double> stop,
                                     double duration_ps, double bin_width_ps, double max_tau_ps,
                                     unsigned threads) {
  return correlate_impl(start, stop, duration_ps, bin_width_ps, max_tau_ps, threads, false);
}

CorrelationHistogram correlate(const mc::TimestampStream& s, double bin_width_ps,
                               double max_tau_ps, unsigned threads) {
  make_binning(bin_width_ps, max_tau_ps);
  const auto d2 = s.channel_times(mc::Channel::D2);
  const auto d3 = s.channel_times(mc::Channel::D3);
  return correlate_times(d2, d3, s.duration_ps, bin_width_ps, max_tau_ps, threads);
}

CorrelationHistogram autocorrelate(std::span<const double> times, double duration_ps,
                                   double bin_width_ps, double max_tau_ps, unsigned threads) {
  return correlate_impl(times, times, duration_ps, bin_width_ps, max_tau_ps, threads, true);
}

Visibility visibility_from(double g_par, double s_par, double g_perp, double s_perp) {
  if (!(g_perp > 0.0)) throw NumericError("visibility undefined: g2_perp(0) <= 0");
  const double v = (g_perp - g_par) / g_perp;
  const double d_par = 1.0 / g_perp;
  const double d_perp = g_par / (g_perp * g_perp);
  return {v, std::sqrt(d_par * d_par * s_par * s_par + d_perp * d_perp * s_perp * s_perp)};
}

double bin_average(const analytic::CorrelationCurve& model, double lo, double hi) {
  constexpr int kPanels = 8;  // even, for Simpson
  const double h = (hi - lo) / kPanels;
  double acc = analytic::interpolate(model, lo) + analytic::interpolate(model, hi);
  for (int i = 1; i < kPanels; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * analytic::interpolate(model, lo + i * h);
  }
  return acc * h / 3.0 / (hi - lo);
}

namespace {

std::vector<double> bin_averaged_model(const CorrelationHistogram& h,
                                       const analytic::CorrelationCurve& model) {
  if (model.tau.empty() || model.tau.front() > h.bin_edges.front() ||
      model.tau.back() < h.bin_edges.back()) {
    throw ValidationError("model grid does not cover the histogram range");
  }
  std::vector<double> m(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) m[i] = bin_average(model, h.bin_edges[i], h.bin_edges[i + 1]);
  return m;
}

}  // namespace

DipStatistics dip_statistics(const CorrelationHistogram& h, const analytic::CorrelationCurve& model) {
  if (h.size() < 10) throw ValidationError("dip statistics need at least 10 bins");
  const auto m = bin_averaged_model(h, model);
  const double m0 = analytic::interpolate(model, 0.0);
  const std::size_t n = h.size();
  const double acc = h.accidental_level;

  std::vector<double> x(n), w(n);
  double structure = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 1.0 - m[i];
    structure = std::max(structure, std::abs(x[i]));
  }

  DipStatistics st;
  if (structure < 1e-12) {
    // Flat model: only the baseline is identifiable.
    const double total = static_cast<double>(h.total_counts());
    double msum = 0.0;
    for (const double v : m) msum += v;
    st.baseline = total / (acc * msum);
    st.depth_scale = 0.0;
    const std::size_t c = h.center_index();
    st.g2_zero = h.normalized[c] / st.baseline;
    st.g2_zero_stderr = std::sqrt(std::max(static_cast<double>(h.counts[c]), 1.0)) / acc / st.baseline;
    for (std::size_t i = 0; i < n; ++i) {
      const double expect = st.baseline * m[i];
      const double r = h.normalized[i] - expect;
      st.chi2 += r * r * acc / std::max(expect, 1e-300);
    }
    st.dof = static_cast<double>(n) - 1.0;
    st.chi2_per_dof = st.chi2 / st.dof;
    st.iterations = 1;
    return st;
  }

  // Pearson-weighted fit: variances from the current prediction, iterated.
  LinearFit fit{1.0, -1.0, 0, 0, 0};
  bool settled = false;
  for (int iter = 1; iter <= 50; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pred = std::max(fit.b0 + fit.b1 * x[i], 1e-9);
      w[i] = acc / pred;
    }
    const LinearFit next = weighted_line(x, h.normalized, w);
    const bool small_change = std::abs(next.b0 - fit.b0) <= 1e-12 * std::abs(next.b0) &&
                              std::abs(next.b1 - fit.b1) <= 1e-12 * (std::abs(next.b1) + std::abs(next.b0));
    fit = next;
    st.iterations = iter;
    if (small_change) {
      settled = true;
      break;
    }
  }
  if (!settled) throw NonConvergenceError("dip fit reweighting did not converge");

  st.baseline = fit.b0;
  st.depth_scale = -fit.b1 / fit.b0;
  const double u0 = 1.0 - m0;
  st.g2_zero = 1.0 + fit.b1 * u0 / fit.b0;
  const double d0 = -fit.b1 * u0 / (fit.b0 * fit.b0);
  const double d1 = u0 / fit.b0;
  st.g2_zero_stderr = std::sqrt(std::max(0.0, d0 * d0 * fit.v00 + 2.0 * d0 * d1 * fit.v01 + d1 * d1 * fit.v11));
  for (std::size_t i = 0; i < n; ++i) {
    const double r = h.normalized[i] - (fit.b0 + fit.b1 * x[i]);
    st.chi2 += r * r * w[i];
  }
  st.dof = static_cast<double>(n) - 2.0;
  st.chi2_per_dof = st.chi2 / st.dof;
  return st;
}

DipStatistics dip_statistics(const CorrelationHistogram& h_parallel,
                             const analytic::CorrelationCurve& model_parallel,
                             const CorrelationHistogram& h_orthogonal,
                             const analytic::CorrelationCurve& model_orthogonal) {
  auto par = dip_statistics(h_parallel, model_parallel);
  const auto perp = dip_statistics(h_orthogonal, model_orthogonal);
  par.visibility_vs = visibility_from(par.g2_zero, par.g2_zero_stderr, perp.g2_zero, perp.g2_zero_stderr);
  return par;
}

ModelComparison compare_to_model(const CorrelationHistogram& h,
                                 const analytic::CorrelationCurve& model) {
  const auto m = bin_averaged_model(h, model);
  ModelComparison out;
  std::size_t used = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double expect = m[i] * h.accidental_level;
    if (expect < 5.0) continue;
    const double r = static_cast<double>(h.counts[i]) - expect;
    out.chi2 += r * r / expect;
    ++used;
  }
  out.dof = static_cast<double>(used);
  out.chi2_per_dof = used > 0 ? out.chi2 / out.dof : 0.0;
  return out;
}

void write_histogram_csv(std::ostream& out, const CorrelationHistogram& h) {
  const auto prec = out.precision(10);
  out << "tau_ps,counts,g2,sigma\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    out << h.bin_center(i) << ',' << h.counts[i] << ',' << h.normalized[i] << ',' << h.sigma[i] << '\n';
  }
  out.precision(prec);
}

void write_histogram_metadata(std::ostream& out, const CorrelationHistogram& h) {
  const auto prec = out.precision(12);
  out << "duration_ps = " << h.duration_ps << '\n'
      << "clicks_D2 = " << h.n_start << '\n'
      << "clicks_D3 = " << h.n_stop << '\n'
      << "rate_D2_per_ps = " << static_cast<double>(h.n_start) / h.duration_ps << '\n'
      << "rate_D3_per_ps = " << static_cast<double>(h.n_stop) / h.duration_ps << '\n'
      << "bin_width_ps = " << h.bin_width << '\n'
      << "bins = " << h.size() << '\n'
      << "accidental_level = " << h.accidental_level << '\n'
      << "normalization = counts / (N_D2 * N_D3 * bin_width / duration)\n"
      << "total_pairs = " << h.total_counts() << '\n';
  out.precision(prec);
}

}  // namespace hom::corr
