#include "hom/inference.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hom/error.hpp"
#include "hom/mc.hpp"
#include "hom/minimize.hpp"

namespace hom::inference {

GammaFit fit_gamma(std::span<const VisibilityPoint> points, const QuantumSourceParams& q,
                   const CoherentSourceParams& c, const DetectorResponse& d,
                   const analytic::ModelOptions& opts) {
  if (points.size() < 3) throw ValidationError("gamma fit needs at least 3 points");
  for (const auto& p : points) {
    if (!(p.ratio > 0.0)) throw ValidationError("visibility points need ratio > 0");
    if (!(p.sigma > 0.0)) throw ValidationError("visibility points need sigma > 0");
    if (!std::isfinite(p.visibility)) throw ValidationError("visibility must be finite");
  }

  // Visibility at γ = 1 per point; the model scales as γ² times this.
  std::vector<double> unit(points.size());
  const InterferenceConfig full_overlap(1.0, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    unit[i] = analytic::visibility_convolved(points[i].ratio, q, c, full_overlap, d, opts);
  }
  const auto chi2 = [&](double gamma) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double model =
          analytic::visibility_convolved(points[i].ratio, q, c, InterferenceConfig(gamma, 0.0), d, opts);
      const double r = (points[i].visibility - model) / points[i].sigma;
      s += r * r;
    }
    return s;
  };

  const auto best = fit::golden_section_minimize(chi2, 0.0, 1.0, 1e-12);

  GammaFit out;
  out.gamma_hat = best.x;
  out.chi2 = best.value;
  out.chi2_per_dof = best.value / static_cast<double>(points.size() - 1);
  out.at_boundary = best.x < 1e-6 || best.x > 1.0 - 1e-6;

  // Gauss–Newton curvature: dV/dγ = 2γ·V(γ=1).
  double info_gamma = 0.0;
  double info_gamma_sq = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double j = 2.0 * best.x * unit[i] / points[i].sigma;
    info_gamma += j * j;
    const double js = unit[i] / points[i].sigma;
    info_gamma_sq += js * js;
  }
  if (info_gamma > 0.0 && best.x > 1e-6) {
    out.gamma_stderr = 1.0 / std::sqrt(info_gamma);
  } else if (info_gamma_sq > 0.0) {
    // At γ = 0 the curvature in γ vanishes; quote √σ(γ²) instead.
    out.gamma_stderr = std::sqrt(1.0 / std::sqrt(info_gamma_sq));
  } else {
    throw NumericError("model carries no information about gamma");
  }
  return out;
}

Optimum predict_optimum(const QuantumSourceParams& q, const CoherentSourceParams& c,
                        const InterferenceConfig& ic, const DetectorResponse& d,
                        const analytic::ModelOptions& opts) {
  const auto v = [&](double log_r) {
    return analytic::visibility_convolved(std::exp(log_r), q, c, ic, d, opts);
  };
  const double hi = std::log(kMaxSearchRatio);
  const auto best = fit::golden_section_maximize(v, std::log(1e-6), hi, 1e-12);
  Optimum out;
  out.ratio_star = std::exp(best.x);
  out.v_max = best.value;
  out.at_boundary = best.x >= hi - 1e-9;
  return out;
}

std::vector<VisibilityPoint> read_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("points CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ratio,visibility,sigma") {
    throw ValidationError("points CSV header must be 'ratio,visibility,sigma'");
  }
  std::vector<VisibilityPoint> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream row(line);
    VisibilityPoint p;
    char c1 = 0, c2 = 0;
    if (!(row >> p.ratio >> c1 >> p.visibility >> c2 >> p.sigma) || c1 != ',' || c2 != ',') {
      throw ValidationError("points CSV line " + std::to_string(line_no) + " is malformed");
    }
    out.push_back(p);
  }
  return out;
}

void write_points_csv(std::ostream& out, std::span<const VisibilityPoint> points) {
  const auto prec = out.precision(10);
  out << "ratio,visibility,sigma\n";
  for (const auto& p : points) out << p.ratio << ',' << p.visibility << ',' << p.sigma << '\n';
  out.precision(prec);
}

PairedHistograms simulate_pair(const ModelConfig& cfg, double ratio, std::size_t ratio_index,
                               const PipelineOptions& opts) {
  if (!(ratio > 0.0)) throw ValidationError("ratio must be > 0");
  mc::McRunConfig run;
  run.duration_ps = opts.duration_ps;
  run.dot_rate = opts.total_rate_per_ps * ratio / (1.0 + ratio);
  run.laser_rate = opts.total_rate_per_ps / (1.0 + ratio);
  run.mode = mc::Mode::TwoSource;
  run.splitter = cfg.splitter();
  run.detector = cfg.detector();
  run.quantum = cfg.quantum();
  run.coherent = cfg.coherent();
  run.segments = opts.segments;

  PairedHistograms out;
  out.ratio = ratio;
  for (const bool parallel : {true, false}) {
    run.ic = InterferenceConfig(cfg.gamma, parallel ? 0.0 : deg_to_rad(90.0));
    run.seed = opts.seed * 1000003ULL + 2 * ratio_index + (parallel ? 0 : 1);
    const auto stream = mc::simulate(run);
    auto h = corr::correlate(stream, opts.bin_width_ps, opts.max_tau_ps);
    (parallel ? out.parallel : out.orthogonal) = std::move(h);
  }
  return out;
}

VisibilityPoint measure_visibility(const PairedHistograms& pair, const ModelConfig& cfg,
                                   double model_gamma) {
  ModelConfig model_cfg = cfg;
  model_cfg.eta = pair.ratio;
  model_cfg.alpha_sq = 1.0;
  model_cfg.gamma = model_gamma;

  const double half = std::max(pair.parallel.bin_edges.back(), -pair.parallel.bin_edges.front()) +
                      pair.parallel.bin_width;
  const auto q = model_cfg.quantum();
  const auto grid = analytic::symmetric_grid(half, analytic::default_grid_step(q, model_cfg.detector()));

  model_cfg.phi_deg = 0.0;
  const auto model_par = analytic::g2_full_curve(grid, model_cfg, true);
  model_cfg.phi_deg = 90.0;
  const auto model_perp = analytic::g2_full_curve(grid, model_cfg, true);

  const auto st = corr::dip_statistics(pair.parallel, model_par, pair.orthogonal, model_perp);
  return {pair.ratio, st.visibility_vs->value, st.visibility_vs->sigma};
}

VisibilityCurve infer_gamma(std::span<const PairedHistograms> pairs, const ModelConfig& cfg,
                            int refinements) {
  VisibilityCurve curve;
  double model_gamma = 1.0;
  for (int pass = 0; pass <= refinements; ++pass) {
    curve.points.clear();
    for (const auto& p : pairs) curve.points.push_back(measure_visibility(p, cfg, model_gamma));
    curve.fit = fit_gamma(curve.points, cfg.quantum(), cfg.coherent(), cfg.detector());
    // A γ̂ of 0 would make the parallel model flat; keep a usable dip shape.
    model_gamma = std::max(curve.fit->gamma_hat, 0.05);
  }
  return curve;
}

}  // namespace hom::inference
