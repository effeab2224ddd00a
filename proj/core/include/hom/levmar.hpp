#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hom::fit {

// Writes weighted residuals (y_i − f_i(p)) / σ_i for parameters p.
using ResidualFn = std::function<void(std::span<const double> params, std::span<double> residuals)>;

struct LmOptions {
  int max_iterations = 200;
  double initial_lambda = 1e-3;
  double relative_tolerance = 1e-12;  // on χ² decrease and step size
  double fd_relative_step = 1e-7;     // forward-difference Jacobian
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> covariance;  // row-major, (JᵀJ)⁻¹ at the solution
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;

  double stderr_of(std::size_t i) const;
};

/// Damped least squares (Levenberg–Marquardt) with a finite-difference Jacobian.
LmResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> initial,
                             std::size_t n_residuals, const LmOptions& opts = {});

}  // namespace hom::fit
