#pragma once

#include <functional>

namespace hom::fit {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
ScalarOptimum golden_section_minimize(const std::function<double(double)>& f, double lo,
                                      double hi, double x_tolerance = 1e-10,
                                      int max_iterations = 500);

ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo,
                                      double hi, double x_tolerance = 1e-10,
                                      int max_iterations = 500);

}  // namespace hom::fit
