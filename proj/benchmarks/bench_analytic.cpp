#include <benchmark/benchmark.h>

#include "hom/analytic.hpp"
#include "hom/inference.hpp"

namespace {

const hom::QuantumSourceParams kDot(1e-3, 285.0, 985.0, 0.04);
const hom::DetectorResponse kDet(428.0);

void BM_ConvolveResponse(benchmark::State& state) {
  const auto grid = hom::analytic::symmetric_grid(12000.0, hom::analytic::default_grid_step(kDot, kDet));
  const auto ideal = hom::analytic::hbt_curve(grid, kDot, kDet, false);
  for (auto _ : state) {
    auto c = hom::analytic::convolve_response(ideal, kDet);
    benchmark::DoNotOptimize(c.values.data());
  }
  state.SetLabel(std::to_string(grid.size()) + " points");
}
BENCHMARK(BM_ConvolveResponse)->Unit(benchmark::kMillisecond);

void BM_PredictOptimum(benchmark::State& state) {
  for (auto _ : state) {
    auto o = hom::inference::predict_optimum(kDot, hom::CoherentSourceParams(1e-3),
                                             hom::InterferenceConfig(0.91, 0.0), kDet);
    benchmark::DoNotOptimize(o.ratio_star);
  }
}
BENCHMARK(BM_PredictOptimum);

}  // namespace
