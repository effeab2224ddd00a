#include "hom/fringe.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "hom/error.hpp"
#include "hom/levmar.hpp"
#include "hom/units.hpp"

namespace hom::fringe {

MichelsonConfig::MichelsonConfig(double a0, double delay_ps, double detuning_ueV)
    : a0_(a0), delay_(delay_ps), detuning_(detuning_ueV) {
  if (!(a0_ > 0.0 && a0_ <= 1.0)) throw ValidationError("A0 must lie in (0, 1]");
  if (!std::isfinite(delay_)) throw ValidationError("interferometer delay must be finite");
  if (!std::isfinite(detuning_)) throw ValidationError("detuning must be finite");
}

double single_source_contrast(double delay_ps, double tau_coh_ps, double a0) {
  if (!(tau_coh_ps > 0.0)) throw ValidationError("tau_coh must be > 0");
  return a0 * std::exp(-std::abs(delay_ps) / tau_coh_ps);
}

double combined_contrast(double delay_ps, double detuning_ueV, double tau_coh_dot_ps,
                         double tau_coh_laser_ps) {
  const double a_d = single_source_contrast(delay_ps, tau_coh_dot_ps);
  const double a_l = single_source_contrast(delay_ps, tau_coh_laser_ps);
  // Built from h rather than ħ so one beat period advances the phase by exactly 2π.
  const double cycles = detuning_ueV * delay_ps / constants::kPlanckUeVps;
  const double phase = 2.0 * std::numbers::pi * (cycles - std::round(cycles));
  const double sq = a_d * a_d + a_l * a_l + 2.0 * a_d * a_l * std::cos(phase);
  return 0.5 * std::sqrt(std::max(sq, 0.0));
}

double combined_contrast(const MichelsonConfig& cfg, double tau_coh_dot_ps,
                         double tau_coh_laser_ps) {
  return combined_contrast(cfg.delay(), cfg.detuning(), tau_coh_dot_ps, tau_coh_laser_ps);
}

double beat_period(double delay_ps) {
  if (delay_ps == 0.0) throw ValidationError("beat period is undefined at zero delay");
  return constants::kPlanckUeVps / std::abs(delay_ps);
}

DetuningFit fit_detuning(const ContrastScan& scan, const MichelsonConfig& cfg,
                         double tau_coh_dot_ps, double tau_coh_laser_ps,
                         const DetuningFitOptions& opts) {
  const std::size_t n = scan.position.size();
  if (scan.contrast.size() != n || (!scan.sigma.empty() && scan.sigma.size() != n)) {
    throw ValidationError("scan columns differ in length");
  }
  if (n < 8) throw ValidationError("detuning fit needs at least 8 scan points");
  if (!(opts.initial_scale != 0.0)) throw ValidationError("initial scale must be non-zero");
  const bool weighted = !scan.sigma.empty();
  for (const double s : scan.sigma) {
    if (!(s > 0.0)) throw ValidationError("scan sigmas must be > 0");
  }

  const double period = beat_period(cfg.delay());
  const auto [xmin, xmax] = std::minmax_element(scan.position.begin(), scan.position.end());
  if ((*xmax - *xmin) * std::abs(opts.initial_scale) < 0.5 * period) {
    throw DegenerateScanError("scan spans less than half a beat period");
  }

  const auto weight = [&](std::size_t i) { return weighted ? 1.0 / scan.sigma[i] : 1.0; };

  // Constant-model χ², the reference for deciding whether any modulation is present.
  double wsum = 0.0;
  double wy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w2 = weight(i) * weight(i);
    wsum += w2;
    wy += w2 * scan.contrast[i];
  }
  const double mean = wy / wsum;
  double chi2_const = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (scan.contrast[i] - mean) * weight(i);
    chi2_const += r * r;
  }
  const auto [ymin, ymax] = std::minmax_element(scan.contrast.begin(), scan.contrast.end());
  if (*ymax - *ymin <= 1e-9 * std::max(1.0, std::abs(mean))) {
    throw DegenerateScanError("scan shows no contrast modulation");
  }

  const double t = cfg.delay();
  const auto residuals = [&](std::span<const double> p, std::span<double> r) {
    const double offset = p[0];
    const double scale = p[1];
    const double amp = p[2];
    for (std::size_t i = 0; i < n; ++i) {
      const double detuning = scale * scan.position[i] + offset;
      const double model = amp * combined_contrast(t, detuning, tau_coh_dot_ps, tau_coh_laser_ps);
      r[i] = (scan.contrast[i] - model) * weight(i);
    }
  };

  const double peak = combined_contrast(t, 0.0, tau_coh_dot_ps, tau_coh_laser_ps);
  const double amp0 = peak > 0.0 ? std::clamp(*ymax / peak, 1e-3, 10.0) : cfg.a0();
  const double offset0 = -opts.initial_scale * opts.prior_zero_point;

  fit::LmOptions lm;
  lm.max_iterations = opts.max_iterations;
  fit::LmResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  const int starts = std::max(1, opts.phase_starts);
  for (int k = 0; k < starts; ++k) {
    const double start_offset = offset0 + period * (static_cast<double>(k) / starts - 0.5);
    auto res = fit::levenberg_marquardt(residuals, {start_offset, opts.initial_scale, amp0}, n, lm);
    if (res.converged && std::isfinite(res.chi2) && res.chi2 < best.chi2) best = std::move(res);
  }
  if (!best.converged) throw NonConvergenceError("detuning fit did not converge from any start");

  double offset = best.params[0];
  double scale = best.params[1];
  double var_o = best.covariance[0];
  double var_s = best.covariance[4];
  double cov_os = best.covariance[1];
  if (scale < 0.0) {
    // cos is even: (s, o) and (−s, −o) describe the same curve.
    scale = -scale;
    offset = -offset;
  }
  if ((*xmax - *xmin) * scale < 0.5 * period) {
    throw DegenerateScanError("fitted scale leaves the scan shorter than half a beat period");
  }

  const double dof = static_cast<double>(n) - 3.0;
  const double reduced = dof > 0.0 ? best.chi2 / dof : 0.0;
  const double var_scale = weighted ? 1.0 : reduced;
  const double modulation_gain = (chi2_const - best.chi2) / (weighted ? 1.0 : std::max(reduced, 1e-300));
  if (modulation_gain < 9.0) {
    throw DegenerateScanError("contrast modulation is not significant");
  }

  // Choose the contrast maximum nearest the prior zero point.
  double zero = -offset / scale;
  const double shift = std::round((opts.prior_zero_point - zero) * scale / period);
  offset -= shift * period;
  zero = -offset / scale;

  DetuningFit fit;
  fit.offset_ueV = offset;
  fit.scale = scale;
  fit.amplitude = best.params[2];
  fit.zero_point = zero;
  fit.offset_stderr = std::sqrt(var_o * var_scale);
  fit.scale_stderr = std::sqrt(var_s * var_scale);
  // Sign flips of (s, o) leave var_o, var_s, cov_os unchanged.
  fit.zero_point_stderr_ueV =
      std::sqrt(std::max(0.0, (var_o + zero * zero * var_s + 2.0 * zero * cov_os) * var_scale));
  fit.chi2 = best.chi2;
  fit.chi2_per_dof = reduced;
  fit.iterations = best.iterations;
  return fit;
}

ContrastScan read_scan_csv(std::istream& in) {
  ContrastScan scan;
  std::string line;
  bool have_header = false;
  bool with_sigma = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line.rfind("detuning_ueV,contrast", 0) == 0) {
        scan.axis = ScanAxis::DetuningUeV;
      } else if (line.rfind("piezo_V,contrast", 0) == 0) {
        scan.axis = ScanAxis::PiezoVolts;
      } else {
        throw ValidationError("scan CSV header must be 'detuning_ueV,contrast[,sigma]' or "
                              "'piezo_V,contrast[,sigma]'");
      }
      with_sigma = line.ends_with(",sigma");
      have_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError("scan CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (values.size() != (with_sigma ? 3U : 2U)) {
      throw ValidationError("scan CSV line " + std::to_string(line_no) + ": wrong column count");
    }
    scan.position.push_back(values[0]);
    scan.contrast.push_back(values[1]);
    if (with_sigma) scan.sigma.push_back(values[2]);
  }
  if (!have_header) throw ValidationError("scan CSV is empty");
  return scan;
}

void write_scan_csv(std::ostream& out, const ContrastScan& scan) {
  const auto prec = out.precision(12);
  out << (scan.axis == ScanAxis::DetuningUeV ? "detuning_ueV" : "piezo_V") << ",contrast"
      << (scan.sigma.empty() ? "" : ",sigma") << '\n';
  for (std::size_t i = 0; i < scan.position.size(); ++i) {
    out << scan.position[i] << ',' << scan.contrast[i];
    if (!scan.sigma.empty()) out << ',' << scan.sigma[i];
    out << '\n';
  }
  out.precision(prec);
}

void write_contrast_map_csv(std::ostream& out, std::span<const double> delays_ps,
                            std::span<const double> detunings_ueV, double tau_coh_dot_ps,
                            double tau_coh_laser_ps) {
  const auto prec = out.precision(9);
  out << "delay_ps,detuning_ueV,contrast\n";
  for (const double t : delays_ps) {
    for (const double e : detunings_ueV) {
      out << t << ',' << e << ',' << combined_contrast(t, e, tau_coh_dot_ps, tau_coh_laser_ps)
          << '\n';
    }
  }
  out.precision(prec);
}

}  // namespace hom::fringe
