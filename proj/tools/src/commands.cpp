#include "commands.hpp"

#include <algorithm>
#include <ostream>

#include "atomic_file.hpp"
#include "hom/error.hpp"
#include "hom_profile.hpp"

namespace hom::cli {

ModelConfig load_model(const std::string& path, std::optional<double> phi_deg) {
  ModelConfig cfg = path.empty() ? ModelConfig::parse(kPaperDefaultsProfile, kPaperDefaultsName)
                                 : ModelConfig::load(path);
  if (phi_deg) cfg.phi_deg = *phi_deg;
  cfg.validate();
  return cfg;
}

std::string profile_label(const std::string& path) {
  return path.empty() ? std::string(kPaperDefaultsName) : path;
}

nlohmann::ordered_json config_json(const ModelConfig& cfg) {
  return {
      {"eta", cfg.eta},
      {"alpha_sq", cfg.alpha_sq},
      {"tau_coh_ps", cfg.tau_coh_ps},
      {"tau_rad_ps", cfg.tau_rad_ps},
      {"background_fraction", cfg.background_fraction},
      {"tau_coh_laser_ps", cfg.tau_coh_laser_ps},
      {"pair_fwhm_ps", cfg.pair_fwhm_ps},
      {"dark_rate_per_ps", cfg.dark_rate_per_ps},
      {"gamma", cfg.gamma},
      {"phi_deg", cfg.phi_deg},
      {"R", cfg.R},
  };
}

std::string version_string() {
  return "homsim " + std::string(kToolVersion) + " (config schema " +
         std::to_string(kConfigSchemaVersion) + ")";
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(out);
  } else {
    write_atomic(path, body);
  }
}

mc::McRunConfig make_run(const ModelConfig& cfg, mc::Mode mode, double total_rate_per_ps,
                         double duration_ps, std::uint64_t seed) {
  if (!(total_rate_per_ps > 0.0)) throw ValidationError("--rate-per-ps must be > 0");
  mc::McRunConfig run;
  run.mode = mode;
  run.duration_ps = duration_ps;
  run.seed = seed;
  run.splitter = cfg.splitter();
  run.ic = cfg.interference();
  run.detector = cfg.detector();
  run.quantum = cfg.quantum();
  run.coherent = cfg.coherent();
  switch (mode) {
    case mc::Mode::HbtDot:
      run.dot_rate = total_rate_per_ps;
      run.laser_rate = 0.0;
      break;
    case mc::Mode::HbtLaser:
      run.dot_rate = 0.0;
      run.laser_rate = total_rate_per_ps;
      break;
    case mc::Mode::TwoSource: {
      const double r = intensity_ratio(cfg.quantum(), cfg.coherent());
      run.dot_rate = total_rate_per_ps * r / (1.0 + r);
      run.laser_rate = total_rate_per_ps / (1.0 + r);
      break;
    }
  }
  run.validate();
  return run;
}

analytic::CorrelationCurve model_curve(mc::Mode mode, const ModelConfig& cfg, double half_span_ps) {
  const auto q = cfg.quantum();
  const auto d = cfg.detector();
  const auto grid = analytic::symmetric_grid(half_span_ps, analytic::default_grid_step(q, d));
  switch (mode) {
    case mc::Mode::HbtDot:
      return analytic::hbt_curve(grid, q, d, true);
    case mc::Mode::HbtLaser: {
      analytic::CorrelationCurve flat;
      flat.tau = grid;
      flat.values.assign(grid.size(), 1.0);
      flat.convolved = true;
      return flat;
    }
    case mc::Mode::TwoSource:
      break;
  }
  return analytic::g2_full_curve(grid, cfg, true);
}

}  // namespace hom::cli
