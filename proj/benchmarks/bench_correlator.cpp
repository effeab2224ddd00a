#include <benchmark/benchmark.h>

#include "hom/correlator.hpp"
#include "hom/rng.hpp"

namespace {

std::vector<double> poisson(double rate, double duration, std::uint32_t sub) {
  hom::rng::Stream gen(3, 0, sub);
  std::vector<double> t;
  for (double x = gen.exponential(rate); x < duration; x += gen.exponential(rate)) t.push_back(x);
  return t;
}

void BM_CorrelateFlat(benchmark::State& state) {
  const double duration = static_cast<double>(state.range(0)) / 1e-4;  // clicks at 1e-4/ps total
  const auto a = poisson(5e-5, duration, 1);
  const auto b = poisson(5e-5, duration, 2);
  for (auto _ : state) {
    auto h = hom::corr::correlate_times(a, b, duration, 64.0, 6400.0, 1);
    benchmark::DoNotOptimize(h.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size() + b.size()));
}
BENCHMARK(BM_CorrelateFlat)->Arg(1'000'000)->Arg(10'000'000)->Unit(benchmark::kMillisecond);

void BM_CorrelateWindow(benchmark::State& state) {
  const double duration = 1e10;
  const auto a = poisson(5e-5, duration, 1);
  const auto b = poisson(5e-5, duration, 2);
  const double max_tau = static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto h = hom::corr::correlate_times(a, b, duration, 64.0, max_tau, 1);
    benchmark::DoNotOptimize(h.counts.data());
  }
}
BENCHMARK(BM_CorrelateWindow)->Arg(6400)->Arg(64000)->Arg(640000)->Unit(benchmark::kMillisecond);

}  // namespace
