#include "hom/minimize.hpp"

#include <cmath>

#include "hom/error.hpp"

namespace hom::fit {

ScalarOptimum golden_section_minimize(const std::function<double(double)>& f, double lo,
                                      double hi, double x_tolerance, int max_iterations) {
  if (!(lo < hi)) throw ValidationError("golden-section search needs lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int iter = 0;
  while (b - a > x_tolerance * (1.0 + std::abs(a) + std::abs(b)) / 2.0) {
    if (++iter > max_iterations) {
      throw NonConvergenceError("golden-section search did not converge");
    }
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }

  ScalarOptimum best{c, fc, iter};
  if (fd < best.value) best = {d, fd, iter};
  // The bracket ends are never evaluated by the interior points; check them so
  // a monotone function reports its boundary optimum exactly.
  if (const double fl = f(lo); fl < best.value) best = {lo, fl, iter};
  if (const double fh = f(hi); fh < best.value) best = {hi, fh, iter};
  return best;
}

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo,
                                      double hi, double x_tolerance, int max_iterations) {
  auto best = golden_section_minimize([&](double x) { return -f(x); }, lo, hi, x_tolerance,
                                      max_iterations);
  best.value = -best.value;
  return best;
}

}  // namespace hom::fit
