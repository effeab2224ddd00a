#include <cmath>
#include <ostream>
#include <vector>

#include "atomic_file.hpp"
#include "commands.hpp"
#include "hom/correlator.hpp"
#include "hom/error.hpp"
#include "hom/fringe.hpp"
#include "hom/inference.hpp"

namespace hom::cli {
namespace {

constexpr double kMcTotalRate = 4e-5;  // detected counts/ps, both channels
constexpr double kMcDuration = 5e10;
constexpr double kMaxTau = 6400.0;

std::vector<double> log_axis(double lo, double hi, int intervals) {
  std::vector<double> v(static_cast<std::size_t>(intervals) + 1);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i <= intervals; ++i) v[i] = std::pow(10.0, a + (b - a) * i / intervals);
  return v;
}

struct Writer {
  const ReproduceOptions& opts;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_atomic(opts.out_dir / name, body);
    files.push_back(name);
  }
};

void fig1b(const ModelConfig&, Writer& w, nlohmann::ordered_json&) {
  w.write("fig1b.csv", [](std::ostream& os) {
    os.precision(12);
    os << "ratio,g2_parallel,g2_orthogonal,visibility\n";
    for (double r : log_axis(0.01, 100.0, 400)) {
      os << r << ',' << analytic::g2_parallel_ideal(r) << ',' << analytic::g2_orthogonal_ideal(r) << ','
         << analytic::visibility_ideal(r) << '\n';
    }
  });
}

void fig2b(const ModelConfig& cfg, Writer& w, nlohmann::ordered_json& results) {
  std::vector<double> delays, detunings;
  for (int i = 0; i <= 100; ++i) delays.push_back(10.0 * i);
  for (int i = -120; i <= 120; ++i) detunings.push_back(0.25 * i);
  w.write("fig2b.csv", [&](std::ostream& os) {
    fringe::write_contrast_map_csv(os, delays, detunings, cfg.tau_coh_ps, cfg.tau_coh_laser_ps);
  });
  results["beat_period_ueV_at_380ps"] = fringe::beat_period(380.0);
}

void write_histogram_with_model(std::ostream& os, const corr::CorrelationHistogram& h,
                                const analytic::CorrelationCurve& model) {
  os.precision(10);
  os << "tau_ps,counts,g2,sigma,model\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    os << h.bin_center(i) << ',' << h.counts[i] << ',' << h.normalized[i] << ',' << h.sigma[i] << ','
       << corr::bin_average(model, h.bin_edges[i], h.bin_edges[i + 1]) << '\n';
  }
}

void fig3(const ModelConfig& base, Writer& w, nlohmann::ordered_json& results,
          nlohmann::ordered_json& seeds) {
  struct Panel {
    const char* name;
    mc::Mode mode;
    double phi_deg;
  };
  const Panel panels[] = {{"fig3b", mc::Mode::HbtDot, 0.0},
                          {"fig3c", mc::Mode::HbtLaser, 0.0},
                          {"fig3d", mc::Mode::TwoSource, 90.0},
                          {"fig3e", mc::Mode::TwoSource, 0.0}};
  const double duration = w.opts.duration_ps.value_or(kMcDuration);
  const double half = kMaxTau + 2.0 * w.opts.bin_ps;
  const auto grid = analytic::symmetric_grid(half, analytic::default_grid_step(base.quantum(), base.detector()));

  std::uint64_t k = 0;
  for (const auto& p : panels) {
    ModelConfig cfg = base;
    cfg.phi_deg = p.phi_deg;
    analytic::CorrelationCurve ideal, conv;
    if (p.mode == mc::Mode::TwoSource) {
      ideal = analytic::g2_full_curve(grid, cfg, false);
      conv = analytic::g2_full_curve(grid, cfg, true);
    } else {
      ideal = model_curve(p.mode, cfg, half);
      conv = ideal;
      if (p.mode == mc::Mode::HbtDot) ideal = analytic::hbt_curve(grid, cfg.quantum(), cfg.detector(), false);
    }
    w.write(std::string(p.name) + "_model.csv", [&](std::ostream& os) {
      os.precision(10);
      os << "tau_ps,g2_ideal,g2_convolved\n";
      for (std::size_t i = 0; i < ideal.tau.size(); ++i) {
        os << ideal.tau[i] << ',' << ideal.values[i] << ',' << conv.values[i] << '\n';
      }
    });

    const std::uint64_t seed = w.opts.seed * 16 + k++;
    const auto run = make_run(cfg, p.mode, kMcTotalRate, duration, seed);
    const auto h = corr::correlate(mc::simulate(run), w.opts.bin_ps, kMaxTau);
    const auto model = model_curve(p.mode, cfg, half);
    const auto dip = corr::dip_statistics(h, model);
    w.write(std::string(p.name) + "_mc.csv", [&](std::ostream& os) { write_histogram_with_model(os, h, model); });
    seeds[p.name] = seed;
    results[p.name] = {{"mode", mc::to_string(p.mode)},
                       {"phi_deg", p.phi_deg},
                       {"coincidences", h.total_counts()},
                       {"g2_zero", dip.g2_zero},
                       {"g2_zero_stderr", dip.g2_zero_stderr},
                       {"g2_zero_model", analytic::interpolate(conv, 0.0)},
                       {"chi2_per_dof", corr::compare_to_model(h, model).chi2_per_dof}};
  }
}

void fig4(const ModelConfig& cfg, Writer& w, nlohmann::ordered_json& results,
          nlohmann::ordered_json& seeds) {
  const auto q = cfg.quantum();
  const auto c = cfg.coherent();
  const auto d = cfg.detector();
  w.write("fig4_model.csv", [&](std::ostream& os) {
    os.precision(10);
    os << "ratio,visibility_model,visibility_unit_overlap\n";
    for (double r : log_axis(0.01, 100.0, 400)) {
      os << r << ',' << analytic::visibility_convolved(r, q, c, InterferenceConfig(cfg.gamma, 0.0), d) << ','
         << analytic::visibility_convolved(r, q, c, InterferenceConfig(1.0, 0.0), d) << '\n';
    }
  });

  inference::PipelineOptions popts;
  popts.seed = w.opts.seed;
  popts.bin_width_ps = w.opts.bin_ps;
  if (w.opts.duration_ps) popts.duration_ps = *w.opts.duration_ps;
  const double ratios[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<inference::PairedHistograms> pairs;
  for (std::size_t i = 0; i < std::size(ratios); ++i) {
    pairs.push_back(inference::simulate_pair(cfg, ratios[i], i, popts));
  }
  const auto curve = inference::infer_gamma(pairs, cfg);
  w.write("fig4_points.csv", [&](std::ostream& os) { inference::write_points_csv(os, curve.points); });

  const auto opt = inference::predict_optimum(q, c, InterferenceConfig(cfg.gamma, 0.0), d);
  seeds["pipeline"] = popts.seed;
  results["gamma_profile"] = cfg.gamma;
  results["ratio_star"] = opt.ratio_star;
  results["v_max"] = opt.v_max;
  results["gamma_hat"] = curve.fit->gamma_hat;
  results["gamma_stderr"] = curve.fit->gamma_stderr;
  results["chi2_per_dof"] = curve.fit->chi2_per_dof;
  results["duration_ps_per_run"] = popts.duration_ps;
  results["total_rate_per_ps"] = popts.total_rate_per_ps;
}

}  // namespace

void reproduce(const ModelConfig& cfg, const ReproduceOptions& opts, std::ostream& out) {
  Writer w{opts};
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  if (opts.figure == "fig1b") {
    fig1b(cfg, w, results);
  } else if (opts.figure == "fig2b") {
    fig2b(cfg, w, results);
  } else if (opts.figure == "fig3") {
    fig3(cfg, w, results, seeds);
  } else if (opts.figure == "fig4") {
    fig4(cfg, w, results, seeds);
  } else {
    throw ValidationError("unknown figure '" + opts.figure + "'");
  }

  nlohmann::ordered_json manifest{
      {"figure", opts.figure},
      {"tool", version_string()},
      {"config_schema_version", kConfigSchemaVersion},
      {"profile", opts.profile},
      {"config", config_json(cfg)},
      {"seed", opts.seed},
      {"seeds", seeds},
      {"bin_ps", opts.bin_ps},
      {"files", w.files},
      {"results", results},
  };
  write_atomic(opts.out_dir / "manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
  out << "wrote " << w.files.size() + 1 << " files to " << opts.out_dir.string() << '\n';
}

}  // namespace hom::cli
