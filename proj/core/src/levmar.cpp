#include "hom/levmar.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hom/error.hpp"

namespace hom::fit {

double LmResult::stderr_of(std::size_t i) const {
  const std::size_t n = params.size();
  return std::sqrt(covariance.at(i * n + i));
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Vec eval(const ResidualFn& f, const Vec& p, std::size_t m) {
  Vec r(static_cast<Eigen::Index>(m));
  f(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
    std::span<double>(r.data(), m));
  return r;
}

Mat jacobian(const ResidualFn& f, const Vec& p, const Vec& r0, std::size_t m, double rel_step) {
  Mat J(static_cast<Eigen::Index>(m), p.size());
  Vec shifted = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = rel_step * std::max(std::abs(p[j]), 1.0);
    shifted[j] = p[j] + h;
    // Residuals are y − f, so J here is −∂f/∂p; the normal equations absorb the sign.
    J.col(j) = (eval(f, shifted, m) - r0) / h;
    shifted[j] = p[j];
  }
  return J;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> initial,
                             std::size_t n_residuals, const LmOptions& opts) {
  const auto n = static_cast<Eigen::Index>(initial.size());
  if (n == 0 || n_residuals < initial.size()) {
    throw ValidationError("least squares needs at least as many residuals as parameters");
  }

  Vec p = Eigen::Map<Vec>(initial.data(), n);
  Vec r = eval(residuals, p, n_residuals);
  double chi2 = r.squaredNorm();
  if (!std::isfinite(chi2)) throw NonConvergenceError("non-finite residuals at the start point");

  double lambda = opts.initial_lambda;
  LmResult result;
  Mat J = jacobian(residuals, p, r, n_residuals, opts.fd_relative_step);

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    result.iterations = iter;
    const Mat JtJ = J.transpose() * J;
    const Vec Jtr = J.transpose() * r;

    bool improved = false;
    while (lambda < 1e12) {
      Mat A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Vec step = A.ldlt().solve(-Jtr);
      const Vec trial = p + step;
      const Vec r_trial = eval(residuals, trial, n_residuals);
      const double chi2_trial = r_trial.squaredNorm();
      if (std::isfinite(chi2_trial) && chi2_trial <= chi2) {
        const double decrease = chi2 - chi2_trial;
        const double step_size = step.norm() / (p.norm() + 1e-12);
        p = trial;
        r = r_trial;
        chi2 = chi2_trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (decrease <= opts.relative_tolerance * (chi2 + 1e-300) ||
            step_size <= opts.relative_tolerance) {
          result.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No downhill step at any damping: already at a minimum within precision.
      result.converged = true;
    }
    J = jacobian(residuals, p, r, n_residuals, opts.fd_relative_step);
    if (result.converged) break;
  }

  result.params.assign(p.data(), p.data() + n);
  result.chi2 = chi2;
  const Mat cov = (J.transpose() * J).ldlt().solve(Mat::Identity(n, n));
  result.covariance.resize(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      result.covariance[static_cast<std::size_t>(i * n + j)] = cov(i, j);
    }
  }
  return result;
}

}  // namespace hom::fit
