#include <benchmark/benchmark.h>

#include "hom/mc.hpp"

namespace {

void BM_Simulate(benchmark::State& state) {
  hom::mc::McRunConfig cfg;
  cfg.mode = static_cast<hom::mc::Mode>(state.range(0));
  cfg.dot_rate = 5e-5;
  cfg.laser_rate = 5e-5;
  cfg.duration_ps = 1e10;
  std::size_t clicks = 0;
  for (auto _ : state) {
    const auto s = hom::mc::simulate(cfg);
    clicks = s.clicks.size();
    benchmark::DoNotOptimize(s.clicks.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(clicks));
  state.SetLabel(hom::mc::to_string(cfg.mode));
}
BENCHMARK(BM_Simulate)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
