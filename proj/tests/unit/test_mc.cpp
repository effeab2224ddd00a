#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hom/analytic.hpp"
#include "hom/correlator.hpp"
#include "hom/error.hpp"
#include "hom/mc.hpp"
#include "hom/rng.hpp"
#include "stats.hpp"

using namespace hom;
using namespace hom::mc;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(rng::philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(rng::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(rng::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("random streams are reproducible and independent per substream") {
  rng::Stream a(42, 0, 1), b(42, 0, 1), c(42, 0, 2), d(42, 1, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
  rng::Stream u(1, 0, 0);
  double sum = 0.0, sum_exp = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = u.uniform();
    CHECK_UNARY(v > 0.0 && v < 1.0);
    sum += v;
    sum_exp += u.exponential(2.0);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum_exp / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("pair kernel") {
  const QuantumSourceParams q(1e-3, 285.0, 985.0, 0.04);
  const BeamSplitter half(0.5);
  CHECK(pair_kernel(0.0, half, InterferenceConfig(1.0, 0.0), q) == 0.0);
  CHECK(pair_kernel(0.0, half, InterferenceConfig(0.91, 0.0), q) == doctest::Approx(0.08595).epsilon(1e-12));
  for (double dt : {0.0, 100.0, -700.0}) {
    for (double g : {0.0, 0.5, 1.0}) {
      CHECK(pair_kernel(dt, half, InterferenceConfig(g, deg_to_rad(90.0)), q) == 0.5);
    }
  }
  CHECK(pair_kernel(0.0, half, InterferenceConfig(0.0, 0.0), q) == 0.5);
  CHECK(pair_kernel(0.0, BeamSplitter(0.3), InterferenceConfig(1.0, 0.0), q) ==
        doctest::Approx(0.16).epsilon(1e-12));  // (T − R)²
}

namespace {

McRunConfig base_config(Mode mode) {
  McRunConfig cfg;
  cfg.mode = mode;
  cfg.duration_ps = 2e9;
  cfg.dot_rate = 2e-5;
  cfg.laser_rate = 2e-5;
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("config validation and warnings") {
  auto cfg = base_config(Mode::TwoSource);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.warnings().empty());

  auto bad = cfg;
  bad.duration_ps = 0.0;
  CHECK_THROWS_AS(simulate(bad), ValidationError);
  bad = cfg;
  bad.laser_rate = -1.0;
  CHECK_THROWS_AS(simulate(bad), ValidationError);
  bad = cfg;
  bad.dot_rate = 1e-3;  // signal·τ_rad > 1/4
  CHECK_THROWS_AS(simulate(bad), ValidationError);
  bad = cfg;
  bad.duration_ps = 1e14;  // 4e9 expected clicks
  CHECK_THROWS_WITH_AS(simulate(bad), doctest::Contains("1e9"), ValidationError);
  bad = cfg;
  bad.segments = 0;
  CHECK_THROWS_AS(simulate(bad), ValidationError);

  auto busy = cfg;
  busy.dot_rate = 1.5e-4;
  CHECK_FALSE(busy.warnings().empty());
  CHECK_THROWS_AS(parse_mode("hom"), ValidationError);
  CHECK(parse_mode(to_string(Mode::HbtLaser)) == Mode::HbtLaser);
}

TEST_CASE("simulate is deterministic and segment output does not depend on threads") {
  auto cfg = base_config(Mode::TwoSource);
  cfg.segments = 4;
  cfg.detector = DetectorResponse(428.0, 1e-7);
  const auto a = simulate(cfg);
  const auto b = simulate(cfg);
  CHECK(a.clicks == b.clicks);
  CHECK(a.config_hash == b.config_hash);
  cfg.seed = 78;
  CHECK(simulate(cfg).clicks != a.clicks);
  CHECK(simulate(cfg).config_hash != a.config_hash);
}

TEST_CASE("dark counts do not perturb photon times") {
  auto cfg = base_config(Mode::TwoSource);
  cfg.tag_origins = true;
  const auto clean = simulate(cfg);
  cfg.detector = DetectorResponse(428.0, 5e-6);
  const auto dark = simulate(cfg);
  auto without_dark = dark;
  std::erase_if(without_dark.clicks, [](const Click& c) { return c.origin == Origin::Dark; });
  CHECK(without_dark.clicks == clean.clicks);
  CHECK(dark.clicks.size() > clean.clicks.size());
}

TEST_CASE("stream invariants: sorted, inside the window, counts near expectation") {
  for (Mode mode : {Mode::HbtDot, Mode::HbtLaser, Mode::TwoSource}) {
    auto cfg = base_config(mode);
    cfg.splitter = BeamSplitter(0.5);
    const auto s = simulate(cfg);
    CHECK(std::is_sorted(s.clicks.begin(), s.clicks.end(),
                         [](const Click& a, const Click& b) { return a.time_ps < b.time_ps; }));
    for (Channel ch : {Channel::D2, Channel::D3}) {
      const auto t = s.channel_times(ch);
      CHECK(std::adjacent_find(t.begin(), t.end(), [](double a, double b) { return b <= a; }) == t.end());
      CHECK(t.front() >= 0.0);
      CHECK(t.back() <= cfg.duration_ps);
      double rate = 0.0;
      if (mode != Mode::HbtLaser) rate += cfg.dot_rate;
      if (mode != Mode::HbtDot) rate += cfg.laser_rate;
      const double expected = 0.5 * rate * cfg.duration_ps;
      CHECK(std::abs(static_cast<double>(t.size()) - expected) < 4.0 * std::sqrt(expected));
    }
  }
}

TEST_CASE("unbalanced splitter routes dot and laser photons by R and T") {
  auto cfg = base_config(Mode::HbtDot);
  cfg.splitter = BeamSplitter(0.3);
  auto s = simulate(cfg);
  const double n = static_cast<double>(s.clicks.size());
  // Dot photons are transmitted to D2.
  CHECK(std::abs(static_cast<double>(s.count(Channel::D2)) - 0.7 * n) < 4.0 * std::sqrt(n * 0.21));
  cfg.mode = Mode::HbtLaser;
  s = simulate(cfg);
  const double m = static_cast<double>(s.clicks.size());
  CHECK(std::abs(static_cast<double>(s.count(Channel::D2)) - 0.3 * m) < 4.0 * std::sqrt(m * 0.21));
}

TEST_CASE("laser-only and laser-laser correlations are flat") {
  auto cfg = base_config(Mode::HbtLaser);
  cfg.duration_ps = 2e10;
  cfg.laser_rate = 5e-5;
  auto h = corr::correlate(simulate(cfg), 64.0, 3200.0);
  const double mean = std::accumulate(h.normalized.begin(), h.normalized.end(), 0.0) / h.size();
  const double sigma_mean = 1.0 / std::sqrt(static_cast<double>(h.total_counts()));
  CHECK(std::abs(mean - 1.0) < 3.0 * sigma_mean);

  auto two = base_config(Mode::TwoSource);
  two.duration_ps = 2e10;
  two.laser_rate = 5e-5;
  two.dot_rate = 5e-5;
  two.ic = InterferenceConfig(1.0, 0.0);
  two.tag_origins = true;
  const auto laser_only = filter_origin(simulate(two), Origin::Laser);
  h = corr::correlate(laser_only, 256.0, 2560.0);
  const auto c = h.center_index();
  CHECK(std::abs(h.normalized[c] - 1.0) < 3.0 * h.sigma[c]);
  const double lmean = std::accumulate(h.normalized.begin(), h.normalized.end(), 0.0) / h.size();
  CHECK(std::abs(lmean - 1.0) < 3.0 / std::sqrt(static_cast<double>(h.total_counts())));
  CHECK_THROWS_AS(filter_origin(simulate(base_config(Mode::HbtLaser)), Origin::Dot), ValidationError);
}

TEST_CASE("HBT dot stream reproduces the convolved analytic dip") {
  auto cfg = base_config(Mode::HbtDot);
  cfg.dot_rate = 8e-5;
  cfg.duration_ps = 1.5e10;
  const auto s = simulate(cfg);
  const auto h = corr::correlate(s, 64.0, 6400.0);
  const auto grid = analytic::symmetric_grid(8000.0, 4.0);
  const auto model = analytic::hbt_curve(grid, cfg.quantum, cfg.detector, true);
  const auto cmp = corr::compare_to_model(h, model);
  MESSAGE("hbt_dot chi2/dof = " << cmp.chi2_per_dof << " over " << h.total_counts() << " pairs");
  CHECK(cmp.chi2_per_dof < 1.5);
  const auto c = h.center_index();
  CHECK(std::abs(h.normalized[c] - 0.20) < 0.03);
}

TEST_CASE("ideal limit: two-source g2(0) follows the ideal formula") {
  auto cfg = base_config(Mode::TwoSource);
  cfg.detector = DetectorResponse(0.0);
  cfg.quantum = QuantumSourceParams(1e-3, 285.0, 985.0, 0.0);
  cfg.ic = InterferenceConfig(1.0, 0.0);
  cfg.dot_rate = 5e-5;
  cfg.laser_rate = 5e-5;
  cfg.duration_ps = 3e10;
  const auto h = corr::correlate(simulate(cfg), 16.0, 1600.0);
  const auto c = h.center_index();
  MESSAGE("g2(0) = " << h.normalized[c] << " +- " << h.sigma[c]);
  CHECK(std::abs(h.normalized[c] - 0.25) < 3.0 * h.sigma[c]);
}

TEST_CASE("unbalanced splitter: zero-delay suppression follows the pair kernel") {
  auto cfg = base_config(Mode::TwoSource);
  cfg.splitter = BeamSplitter(0.3);
  cfg.detector = DetectorResponse(0.0);
  cfg.quantum = QuantumSourceParams(1e-3, 285.0, 985.0, 0.0);
  cfg.ic = InterferenceConfig(1.0, 0.0);
  cfg.dot_rate = 3e-5;
  cfg.laser_rate = 3e-5;
  cfg.duration_ps = 4e10;
  const auto h = corr::correlate(simulate(cfg), 32.0, 9600.0);
  const double R = 0.3, T = 0.7, ld = cfg.dot_rate, ll = cfg.laser_rate;
  const double far = ld * ll * (R * R + T * T) + ll * ll * R * T + ld * ld * R * T;
  // Bin-averaged interference and HBT factors over ±16 ps.
  const double e_coh = 285.0 / 16.0 * (1.0 - std::exp(-16.0 / 285.0));
  const double e_rad = 985.0 / 16.0 * (1.0 - std::exp(-16.0 / 985.0));
  const double zero = ld * ll * (R * R + T * T - 2.0 * R * T * e_coh) + ll * ll * R * T +
                      ld * ld * R * T * (1.0 - e_rad);
  double wings = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    wings += static_cast<double>(h.counts[i] + h.counts[h.size() - 1 - i]);
    n += 2;
  }
  wings /= n;
  const double ratio = static_cast<double>(h.counts[h.center_index()]) / wings;
  const double err = std::sqrt(static_cast<double>(h.counts[h.center_index()])) / wings;
  MESSAGE("R=0.3 zero/wing " << ratio << " +- " << err << " expected " << zero / far);
  CHECK(std::abs(ratio - zero / far) < 3.5 * err);
}

TEST_CASE("seed-splitting: segmented and single runs are statistically indistinguishable") {
  auto cfg = base_config(Mode::TwoSource);
  cfg.dot_rate = 5e-5;
  cfg.laser_rate = 5e-5;
  cfg.duration_ps = 1.2e10;
  const auto single = corr::correlate(simulate(cfg), 64.0, 6400.0);
  cfg.segments = 8;
  cfg.seed = 991;
  const auto split = corr::correlate(simulate(cfg), 64.0, 6400.0);
  double dof = 0.0;
  const double chi2 = stats::two_sample_chi2(single.counts, split.counts, &dof);
  const double p = stats::chi2_upper_p(chi2, dof);
  MESSAGE("two-sample chi2 " << chi2 << " / " << dof << ", p = " << p);
  CHECK(p > 0.01);
}
