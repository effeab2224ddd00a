#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "atomic_file.hpp"
#include "commands.hpp"
#include "hom/correlator.hpp"
#include "hom/error.hpp"
#include "hom/fringe.hpp"
#include "hom/inference.hpp"
#include "hom/stream_io.hpp"

namespace hom::cli {
namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<double> duration_ps;
  std::optional<double> bin_ps;
  std::optional<double> phi_deg;
  std::string format = "csv";
  bool tagged = false;
  std::string affine;
  std::string in;
  std::string mode = "two_source";
  double rate_per_ps = 2e-6;
  double max_tau_ps = 6400.0;
  double step_ps = 4.0;
  unsigned segments = 1;
  double delay_ps = 380.0;
  double prior_ueV = 0.0;
  std::string model;
  std::string figure;
  double delay_max_ps = 1000.0;
  double delay_step_ps = 10.0;
  double detuning_max_ueV = 30.0;
  double detuning_step_ueV = 0.5;
};

void add_config(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Model config file (default: bundled paper-defaults profile)");
}

void add_out(CLI::App* cmd, Flags& f, const std::string& what) {
  cmd->add_option("--out", f.out, what);
}

std::vector<double> arange(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("axis range needs step > 0 and max >= min");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 1000000) throw ValidationError("axis has more than 1e6 points");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + step * static_cast<double>(i);
  return v;
}

void write_two_curves(std::ostream& os, const analytic::CorrelationCurve& ideal,
                      const analytic::CorrelationCurve& convolved) {
  os.precision(10);
  os << "tau_ps,g2_ideal,g2_convolved\n";
  for (std::size_t i = 0; i < ideal.tau.size(); ++i) {
    os << ideal.tau[i] << ',' << ideal.values[i] << ',' << convolved.values[i] << '\n';
  }
}

void cmd_curves(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  const auto grid = analytic::symmetric_grid(f.max_tau_ps, f.step_ps);
  const auto ideal = analytic::g2_full_curve(grid, cfg, false);
  const auto conv = analytic::g2_full_curve(grid, cfg, true);
  emit(f.out, out, [&](std::ostream& os) { write_two_curves(os, ideal, conv); });
}

void cmd_hbt(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  const auto grid = analytic::symmetric_grid(f.max_tau_ps, f.step_ps);
  const auto ideal = analytic::hbt_curve(grid, cfg.quantum(), cfg.detector(), false);
  const auto conv = analytic::hbt_curve(grid, cfg.quantum(), cfg.detector(), true);
  emit(f.out, out, [&](std::ostream& os) { write_two_curves(os, ideal, conv); });
}

void cmd_fringe_map(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  const auto delays = arange(0.0, f.delay_max_ps, f.delay_step_ps);
  const auto detunings = arange(-f.detuning_max_ueV, f.detuning_max_ueV, f.detuning_step_ueV);
  emit(f.out, out, [&](std::ostream& os) {
    fringe::write_contrast_map_csv(os, delays, detunings, cfg.tau_coh_ps, cfg.tau_coh_laser_ps);
  });
}

std::pair<double, double> parse_affine(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError("--affine expects 'a,b'");
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string sa = text.substr(0, comma), sb = text.substr(comma + 1);
    const double a = std::stod(sa, &used_a);
    const double b = std::stod(sb, &used_b);
    if (used_a != sa.size() || used_b != sb.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0) throw std::invalid_argument("range");
    return {a, b};
  } catch (const std::exception&) {
    throw ValidationError("--affine expects two finite numbers 'a,b' with a != 0");
  }
}

void cmd_fringe_fit(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  std::ifstream in(f.in);
  if (!in) throw ValidationError("cannot open scan file '" + f.in + "'");
  const auto scan = fringe::read_scan_csv(in);
  fringe::DetuningFitOptions opts;
  opts.prior_zero_point = f.prior_ueV;
  if (scan.axis == fringe::ScanAxis::PiezoVolts) {
    if (f.affine.empty()) throw ValidationError("piezo scans need --affine a,b (detuning = a*V + b)");
    const auto [a, b] = parse_affine(f.affine);
    opts.initial_scale = a;
    opts.prior_zero_point = (f.prior_ueV - b) / a;
  } else if (!f.affine.empty()) {
    throw ValidationError("--affine applies to piezo_V scans only");
  }
  const fringe::MichelsonConfig mich(1.0, f.delay_ps);
  const auto fit = fringe::fit_detuning(scan, mich, cfg.tau_coh_ps, cfg.tau_coh_laser_ps, opts);
  nlohmann::ordered_json report{
      {"delay_ps", f.delay_ps},
      {"beat_period_ueV", fringe::beat_period(f.delay_ps)},
      {"offset_ueV", fit.offset_ueV},
      {"offset_stderr_ueV", fit.offset_stderr},
      {"scale", fit.scale},
      {"scale_stderr", fit.scale_stderr},
      {"amplitude", fit.amplitude},
      {"zero_point", fit.zero_point},
      {"zero_point_stderr_ueV", fit.zero_point_stderr_ueV},
      {"chi2", fit.chi2},
      {"chi2_per_dof", fit.chi2_per_dof},
      {"iterations", fit.iterations},
  };
  emit(f.out, out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
}

void cmd_mc(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = load_model(f.config, f.phi_deg);
  if (f.out.empty()) throw ValidationError("mc needs --out PATH");
  if (f.format != "csv" && f.format != "bin") throw ValidationError("--format must be csv or bin");
  auto run = make_run(cfg, mc::parse_mode(f.mode), f.rate_per_ps, f.duration_ps.value_or(1e9), f.seed);
  run.segments = f.segments;
  run.tag_origins = f.tagged;
  for (const auto& w : run.warnings()) err << "homsim: warning: " << w << '\n';
  const auto stream = mc::simulate(run);
  write_atomic(f.out, [&](std::ostream& os) {
    if (f.format == "bin") {
      io::write_phts(os, stream);
    } else {
      io::write_stream_csv(os, stream);
    }
  });
  write_atomic(io::metadata_path(f.out), [&](std::ostream& os) {
    io::write_metadata(os, stream);
    os << "mode = " << f.mode << '\n' << "profile = " << profile_label(f.config) << '\n';
  });
  out << "wrote " << stream.clicks.size() << " clicks to " << f.out << " (seed " << stream.seed << ")\n";
}

void cmd_correlate(const Flags& f, std::ostream& out) {
  if (f.in.empty()) throw ValidationError("correlate needs --in PATH");
  const auto stream = io::load_stream(f.in, f.duration_ps);
  const double bin = f.bin_ps.value_or(64.0);
  const auto h = corr::correlate(stream, bin, f.max_tau_ps);

  std::optional<corr::DipStatistics> dip;
  std::optional<corr::ModelComparison> cmp;
  if (!f.model.empty()) {
    const auto cfg = load_model(f.config, f.phi_deg);
    const auto model = model_curve(mc::parse_mode(f.model), cfg, f.max_tau_ps + 2.0 * bin);
    dip = corr::dip_statistics(h, model);
    cmp = corr::compare_to_model(h, model);
  }
  const auto write_meta = [&](std::ostream& os) {
    corr::write_histogram_metadata(os, h);
    os << "seed = " << stream.seed << '\n' << "config_hash = " << stream.config_hash << '\n';
    if (dip) {
      os.precision(10);
      os << "model = " << f.model << '\n'
         << "g2_zero = " << dip->g2_zero << '\n'
         << "g2_zero_stderr = " << dip->g2_zero_stderr << '\n'
         << "dip_chi2_per_dof = " << dip->chi2_per_dof << '\n'
         << "model_chi2_per_dof = " << cmp->chi2_per_dof << '\n';
    }
  };
  if (f.out.empty()) {
    corr::write_histogram_csv(out, h);
  } else {
    write_atomic(f.out, [&](std::ostream& os) { corr::write_histogram_csv(os, h); });
    write_atomic(io::metadata_path(f.out), write_meta);
  }
}

nlohmann::ordered_json optimum_json(const inference::Optimum& opt, double gamma) {
  return {{"gamma", gamma},
          {"ratio_star", opt.ratio_star},
          {"v_max", opt.v_max},
          {"at_boundary", opt.at_boundary}};
}

void cmd_fit_visibility(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  if (f.in.empty()) throw ValidationError("fit-visibility needs --in PATH");
  std::ifstream in(f.in);
  if (!in) throw ValidationError("cannot open points file '" + f.in + "'");
  const auto points = inference::read_points_csv(in);
  const auto fit = inference::fit_gamma(points, cfg.quantum(), cfg.coherent(), cfg.detector());
  const auto opt = inference::predict_optimum(cfg.quantum(), cfg.coherent(),
                                              InterferenceConfig(fit.gamma_hat, 0.0), cfg.detector());
  nlohmann::ordered_json report{
      {"gamma_hat", fit.gamma_hat},
      {"stderr", fit.gamma_stderr},
      {"chi2", fit.chi2},
      {"chi2_per_dof", fit.chi2_per_dof},
      {"at_boundary", fit.at_boundary},
      {"ratio_star", opt.ratio_star},
      {"v_max", opt.v_max},
      {"points", points.size()},
  };
  emit(f.out, out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
}

void cmd_optimum(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  const auto opt = inference::predict_optimum(cfg.quantum(), cfg.coherent(),
                                              InterferenceConfig(cfg.gamma, 0.0), cfg.detector());
  emit(f.out, out, [&](std::ostream& os) { os << optimum_json(opt, cfg.gamma).dump(2) << '\n'; });
}

void cmd_reproduce(const Flags& f, std::ostream& out) {
  const auto cfg = load_model(f.config, f.phi_deg);
  ReproduceOptions opts;
  opts.figure = f.figure;
  opts.out_dir = f.out.empty() ? std::filesystem::path("reproduce") / f.figure : std::filesystem::path(f.out);
  opts.seed = f.seed;
  opts.duration_ps = f.duration_ps;
  opts.bin_ps = f.bin_ps.value_or(64.0);
  opts.profile = profile_label(f.config);
  reproduce(cfg, opts, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-photon interference between a quantum dot and a laser: models, Monte Carlo and analysis",
               "homsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string(), "Print the tool and config-schema versions");
  Flags f;

  auto* curves = app.add_subcommand("curves", "Two-source g2(tau), ideal and convolved");
  add_config(curves, f);
  add_out(curves, f, "Output CSV (default: stdout)");
  curves->add_option("--phi-deg", f.phi_deg, "Polarization angle in degrees");
  curves->add_option("--max-tau-ps", f.max_tau_ps, "Half span of the delay axis")->capture_default_str();
  curves->add_option("--step-ps", f.step_ps, "Delay step")->capture_default_str();

  auto* hbt = app.add_subcommand("hbt", "Dot autocorrelation, ideal and convolved");
  add_config(hbt, f);
  add_out(hbt, f, "Output CSV (default: stdout)");
  hbt->add_option("--max-tau-ps", f.max_tau_ps, "Half span of the delay axis")->capture_default_str();
  hbt->add_option("--step-ps", f.step_ps, "Delay step")->capture_default_str();

  auto* fmap = app.add_subcommand("fringe-map", "Michelson fringe contrast over delay and detuning");
  add_config(fmap, f);
  add_out(fmap, f, "Output CSV (default: stdout)");
  fmap->add_option("--delay-max-ps", f.delay_max_ps)->capture_default_str();
  fmap->add_option("--delay-step-ps", f.delay_step_ps)->capture_default_str();
  fmap->add_option("--detuning-max-ueV", f.detuning_max_ueV)->capture_default_str();
  fmap->add_option("--detuning-step-ueV", f.detuning_step_ueV)->capture_default_str();

  auto* ffit = app.add_subcommand("fringe-fit", "Fit the zero-detuning point of a contrast scan");
  add_config(ffit, f);
  add_out(ffit, f, "Output JSON report (default: stdout)");
  ffit->add_option("--in", f.in, "Scan CSV: detuning_ueV|piezo_V,contrast[,sigma]")->required();
  ffit->add_option("--delay-ps", f.delay_ps, "Interferometer delay")->capture_default_str();
  ffit->add_option("--affine", f.affine, "Piezo calibration a,b with detuning = a*V + b");
  ffit->add_option("--prior-ueV", f.prior_ueV, "Expected zero-detuning position in ueV")->capture_default_str();

  auto* mcc = app.add_subcommand("mc", "Simulate a time-tagged detector stream");
  add_config(mcc, f);
  add_out(mcc, f, "Stream file; a .meta side-car is written next to it");
  mcc->add_option("--mode", f.mode, "hbt_dot | hbt_laser | two_source")->capture_default_str();
  mcc->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  mcc->add_option("--duration-ps", f.duration_ps, "Acquisition time (default 1e9)");
  mcc->add_option("--rate-per-ps", f.rate_per_ps, "Total detected rate, split by eta/alpha_sq")->capture_default_str();
  mcc->add_option("--phi-deg", f.phi_deg, "Polarization angle in degrees");
  mcc->add_option("--segments", f.segments, "Independent time segments simulated in parallel")->capture_default_str();
  mcc->add_option("--format", f.format, "csv | bin")->capture_default_str();
  mcc->add_flag("--tagged", f.tagged, "Label clicks with their origin (debug)");

  auto* cor = app.add_subcommand("correlate", "Cross-correlate the two detector channels");
  add_config(cor, f);
  add_out(cor, f, "Histogram CSV (default: stdout); metadata goes to PATH.meta");
  cor->add_option("--in", f.in, "Stream file (PHTS or CSV)")->required();
  cor->add_option("--bin-ps", f.bin_ps, "Bin width (default 64)");
  cor->add_option("--max-tau-ps", f.max_tau_ps, "Largest |tau|")->capture_default_str();
  cor->add_option("--duration-ps", f.duration_ps, "Override the acquisition time");
  cor->add_option("--model", f.model, "Fit the dip against hbt_dot | hbt_laser | two_source");
  cor->add_option("--phi-deg", f.phi_deg, "Polarization angle for --model two_source");

  auto* fitv = app.add_subcommand("fit-visibility", "Fit the overlap gamma to visibility points");
  add_config(fitv, f);
  add_out(fitv, f, "Output JSON report (default: stdout)");
  fitv->add_option("--in", f.in, "Points CSV: ratio,visibility,sigma")->required();

  auto* optc = app.add_subcommand("optimum", "Intensity ratio of maximal visibility");
  add_config(optc, f);
  add_out(optc, f, "Output JSON (default: stdout)");

  auto* rep = app.add_subcommand("reproduce", "Regenerate the data behind a figure");
  add_config(rep, f);
  add_out(rep, f, "Output directory (default: reproduce/<figure>)");
  rep->add_option("figure", f.figure, "fig1b | fig2b | fig3 | fig4")
      ->required()
      ->check(CLI::IsMember({"fig1b", "fig2b", "fig3", "fig4"}));
  rep->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  rep->add_option("--duration-ps", f.duration_ps, "Acquisition time per Monte Carlo run");
  rep->add_option("--bin-ps", f.bin_ps, "Histogram bin width (default 64)");

  if (args.empty()) {
    err << app.help();
    return kExitValidation;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "homsim: " << e.what() << " (see --help)\n";
    return kExitValidation;
  }

  try {
    if (curves->parsed()) cmd_curves(f, out);
    else if (hbt->parsed()) cmd_hbt(f, out);
    else if (fmap->parsed()) cmd_fringe_map(f, out);
    else if (ffit->parsed()) cmd_fringe_fit(f, out);
    else if (mcc->parsed()) cmd_mc(f, out, err);
    else if (cor->parsed()) cmd_correlate(f, out);
    else if (fitv->parsed()) cmd_fit_visibility(f, out);
    else if (optc->parsed()) cmd_optimum(f, out);
    else if (rep->parsed()) cmd_reproduce(f, out);
  } catch (const ValidationError& e) {
    err << "homsim: error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "homsim: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "homsim: error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace hom::cli
