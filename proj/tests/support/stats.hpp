#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace stats {

// Upper-tail probability of a χ² variable with k degrees of freedom
// (Wilson–Hilferty cube-root normal approximation).
inline double chi2_upper_p(double chi2, double k) {
  const double z = (std::cbrt(chi2 / k) - (1.0 - 2.0 / (9.0 * k))) / std::sqrt(2.0 / (9.0 * k));
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// Two-sample χ² homogeneity test for equal-exposure count vectors.
inline double two_sample_chi2(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                              double* dof = nullptr) {
  double chi2 = 0.0;
  double k = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = static_cast<double>(a[i]) + static_cast<double>(b[i]);
    if (s == 0.0) continue;
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    chi2 += d * d / s;
    k += 1.0;
  }
  if (dof != nullptr) *dof = k;
  return chi2;
}

}  // namespace stats
