#include "hom/special.hpp"

#include <cmath>
#include <numbers>

namespace hom::special {

double erfcx(double x) {
  if (x < 2.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  // Continued fraction erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  // evaluated bottom-up; 60 terms are far past convergence for x >= 2.
  double f = x;
  for (int k = 60; k >= 1; --k) {
    f = x + (0.5 * k) / f;
  }
  return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

double exp_gauss_conv(double tau, double decay, double sigma) {
  if (sigma <= 0.0) {
    return std::exp(-std::abs(tau) / decay);
  }
  // Two branches, t > 0 and t < 0 of the exponential:
  //   ½·exp(s²/2T² ∓ τ/T)·erfc((s/T ∓ τ/s)/√2)
  // rewritten through erfcx where its argument is positive so nothing overflows.
  const double gauss = std::exp(-0.5 * (tau / sigma) * (tau / sigma));
  const double a = sigma / decay;
  const auto branch = [&](double t) {
    const double z = (a - t / sigma) / std::numbers::sqrt2;
    if (z >= 0.0) return erfcx(z) * gauss;
    return std::exp(0.5 * a * a - t / decay) * std::erfc(z);
  };
  return 0.5 * (branch(tau) + branch(-tau));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace hom::special
