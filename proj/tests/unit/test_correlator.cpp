#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hom/analytic.hpp"
#include "hom/correlator.hpp"
#include "hom/error.hpp"
#include "oracles.hpp"

using namespace hom;
using namespace hom::corr;

namespace {

std::vector<double> poisson_times(double rate, double duration, std::mt19937_64& gen,
                                  bool integer_times = false) {
  std::exponential_distribution<double> gap(rate);
  std::vector<double> t;
  for (double x = gap(gen); x < duration; x += gap(gen)) t.push_back(integer_times ? std::floor(x) : x);
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// Histogram with Poisson counts drawn around accidental·model.
CorrelationHistogram synthetic_histogram(const analytic::CorrelationCurve& model, double acc,
                                         double w, long k, std::mt19937_64& gen) {
  CorrelationHistogram h;
  h.bin_width = w;
  h.accidental_level = acc;
  h.duration_ps = 1.0;
  const auto n = static_cast<std::size_t>(2 * k + 1);
  for (std::size_t i = 0; i <= n; ++i) h.bin_edges.push_back((static_cast<double>(i) - k - 0.5) * w);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = acc * bin_average(model, h.bin_edges[i], h.bin_edges[i + 1]);
    const auto c = std::poisson_distribution<std::uint64_t>(mean)(gen);
    h.counts.push_back(c);
    h.normalized.push_back(static_cast<double>(c) / acc);
    h.sigma.push_back(std::sqrt(static_cast<double>(c)) / acc);
  }
  return h;
}

analytic::CorrelationCurve dip_model(double depth) {
  const auto grid = analytic::symmetric_grid(8000.0, 4.0);
  analytic::CorrelationCurve m;
  m.tau = grid;
  for (double t : grid) m.values.push_back(1.0 - depth * std::exp(-std::abs(t) / 400.0));
  return m;
}

}  // namespace

TEST_CASE("correlator matches brute-force enumeration") {
  std::mt19937_64 gen(3);
  for (double w : {16.0, 64.0, 100.0}) {
    const auto a = poisson_times(2e-4, 2e6, gen);
    const auto b = poisson_times(3e-4, 2e6, gen);
    const long k = 40;
    const auto h = correlate_times(a, b, 2e6, w, k * w);
    CHECK(h.counts == oracle::brute_force_histogram(a, b, w, k));
    CHECK(h.size() == static_cast<std::size_t>(2 * k + 1));
    CHECK(h.bin_edges.front() == doctest::Approx(-(k + 0.5) * w));
    CHECK(h.accidental_level == doctest::Approx(a.size() * b.size() * w / 2e6));
  }
}

TEST_CASE("thread count does not change the histogram") {
  std::mt19937_64 gen(4);
  const auto a = poisson_times(1e-3, 5e7, gen);
  const auto b = poisson_times(1e-3, 5e7, gen);
  const auto one = correlate_times(a, b, 5e7, 64.0, 6400.0, 1);
  for (unsigned t : {2U, 3U, 8U}) CHECK(correlate_times(a, b, 5e7, 64.0, 6400.0, t).counts == one.counts);
}

TEST_CASE("channel swap mirrors the histogram exactly") {
  std::mt19937_64 gen(5);
  const auto a = poisson_times(1e-3, 1e7, gen);
  const auto b = poisson_times(1e-3, 1e7, gen);
  const auto ab = correlate_times(a, b, 1e7, 32.0, 3200.0);
  auto ba = correlate_times(b, a, 1e7, 32.0, 3200.0).counts;
  std::reverse(ba.begin(), ba.end());
  CHECK(ab.counts == ba);
}

TEST_CASE("integer time translation leaves the histogram unchanged") {
  std::mt19937_64 gen(6);
  const auto a = poisson_times(1e-3, 1e7, gen, true);
  const auto b = poisson_times(1e-3, 1e7, gen, true);
  auto a2 = a, b2 = b;
  for (auto& t : a2) t += 123457.0;
  for (auto& t : b2) t += 123457.0;
  CHECK(correlate_times(a, b, 1e7, 64.0, 6400.0).counts ==
        correlate_times(a2, b2, 1e7, 64.0, 6400.0).counts);
}

TEST_CASE("autocorrelation equals the self cross-correlation without zero-lag self pairs") {
  std::mt19937_64 gen(7);
  const auto a = poisson_times(1e-3, 1e7, gen);
  const auto cross = correlate_times(a, a, 1e7, 64.0, 3200.0);
  const auto self = autocorrelate(a, 1e7, 64.0, 3200.0);
  auto expected = cross.counts;
  expected[cross.center_index()] -= a.size();
  CHECK(self.counts == expected);
  const auto n = static_cast<double>(a.size());
  CHECK(self.accidental_level == doctest::Approx(n * (n - 1) * 64.0 / 1e7));
}

TEST_CASE("independent Poisson streams give a flat normalized histogram") {
  std::mt19937_64 gen(8);
  const double d = 2e9;
  const auto a = poisson_times(5e-5, d, gen);
  const auto b = poisson_times(5e-5, d, gen);
  const auto h = correlate_times(a, b, d, 64.0, 6400.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(std::abs(h.normalized[i] - 1.0) < 4.0 / std::sqrt(h.accidental_level));
    mean += h.normalized[i];
  }
  mean /= static_cast<double>(h.size());
  CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(h.total_counts())));
}

TEST_CASE("correlator input validation") {
  const std::vector<double> some{1.0, 2.0, 3.0};
  const std::vector<double> none;
  CHECK_THROWS_AS(correlate_times(some, none, 10.0, 1.0, 5.0), EmptyChannelError);
  CHECK_THROWS_AS(correlate_times(none, some, 10.0, 1.0, 5.0), EmptyChannelError);
  CHECK_THROWS_AS(correlate_times(some, some, 10.0, 0.0, 5.0), ValidationError);
  CHECK_THROWS_AS(correlate_times(some, some, 10.0, 2.0, 1.0), ValidationError);
  CHECK_THROWS_WITH_AS(correlate_times(some, some, 10.0, 1e-3, 2e3), doctest::Contains("1e6"),
                       ValidationError);
  const std::vector<double> unsorted{3.0, 1.0};
  CHECK_THROWS_AS(correlate_times(unsorted, some, 10.0, 1.0, 5.0), ValidationError);
}

TEST_CASE("dip statistics are calibrated on Poisson data") {
  const auto model = dip_model(0.7);
  int good = 0;
  int covered = 0;
  constexpr int kSeeds = 200;
  const double true_g0 = 0.3;
  for (int s = 0; s < kSeeds; ++s) {
    std::mt19937_64 gen(1000 + s);
    const auto h = synthetic_histogram(model, 400.0, 64.0, 100, gen);
    const auto st = dip_statistics(h, model);
    if (st.chi2_per_dof >= 0.5 && st.chi2_per_dof <= 1.5) ++good;
    if (std::abs(st.g2_zero - true_g0) < 2.0 * st.g2_zero_stderr) ++covered;
    CHECK(st.dof == 199.0);
  }
  CHECK(good >= 0.95 * kSeeds);
  MESSAGE("2-sigma coverage " << covered << " / " << kSeeds);
  CHECK(covered >= 0.9 * kSeeds);
}

TEST_CASE("dip statistics recover depth and baseline") {
  std::mt19937_64 gen(11);
  const auto truth = dip_model(0.5);
  auto h = synthetic_histogram(truth, 1e6, 64.0, 100, gen);
  // Scale the accidental estimate by 2 %: the fitted baseline absorbs it.
  const double off = 1.02;
  for (auto& v : h.normalized) v /= off;
  for (auto& v : h.sigma) v /= off;
  h.accidental_level *= off;
  const auto st = dip_statistics(h, dip_model(0.7));
  CHECK(st.baseline == doctest::Approx(1.0 / off).epsilon(2e-3));
  CHECK(st.depth_scale == doctest::Approx(0.5 / 0.7).epsilon(5e-3));
  CHECK(st.g2_zero == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("flat model falls back to the zero bin") {
  std::mt19937_64 gen(12);
  const auto flat = dip_model(0.0);
  const auto h = synthetic_histogram(flat, 5000.0, 64.0, 50, gen);
  const auto st = dip_statistics(h, flat);
  CHECK(std::abs(st.g2_zero - 1.0) < 4.0 * st.g2_zero_stderr);
  CHECK(st.depth_scale == 0.0);
  CHECK(st.chi2_per_dof < 1.5);
}

TEST_CASE("dip statistics validation") {
  std::mt19937_64 gen(13);
  const auto model = dip_model(0.5);
  const auto small = synthetic_histogram(model, 100.0, 64.0, 3, gen);
  CHECK_THROWS_AS(dip_statistics(small, model), ValidationError);
  const auto wide = synthetic_histogram(model, 100.0, 64.0, 200, gen);  // ±12.8 ns > model grid
  CHECK_THROWS_AS(dip_statistics(wide, model), ValidationError);
}

TEST_CASE("visibility uncertainty propagation") {
  const auto v = visibility_from(0.4, 0.02, 0.8, 0.03);
  CHECK(v.value == doctest::Approx(0.5));
  // Finite-difference check of the linearised error.
  const double h = 1e-6;
  const double dpar = ((0.8 - (0.4 + h)) / 0.8 - (0.8 - (0.4 - h)) / 0.8) / (2 * h);
  const double dperp = (((0.8 + h) - 0.4) / (0.8 + h) - ((0.8 - h) - 0.4) / (0.8 - h)) / (2 * h);
  CHECK(v.sigma == doctest::Approx(std::hypot(dpar * 0.02, dperp * 0.03)).epsilon(1e-6));
  CHECK_THROWS_AS(visibility_from(0.4, 0.02, 0.0, 0.03), NumericError);

  std::mt19937_64 gen(14);
  const auto mpar = dip_model(0.6);
  const auto mperp = dip_model(0.2);
  const auto hpar = synthetic_histogram(mpar, 2e4, 64.0, 100, gen);
  const auto hperp = synthetic_histogram(mperp, 2e4, 64.0, 100, gen);
  const auto st = dip_statistics(hpar, mpar, hperp, mperp);
  REQUIRE(st.visibility_vs.has_value());
  CHECK(std::abs(st.visibility_vs->value - 0.5) < 4.0 * st.visibility_vs->sigma);
}

TEST_CASE("model comparison and histogram output") {
  std::mt19937_64 gen(15);
  const auto model = dip_model(0.5);
  const auto h = synthetic_histogram(model, 1000.0, 64.0, 100, gen);
  const auto cmp = compare_to_model(h, model);
  CHECK(cmp.dof == 201.0);
  CHECK(cmp.chi2_per_dof < 1.3);
  CHECK(bin_average(model, -32.0, 32.0) < analytic::interpolate(model, 32.0));

  std::ostringstream csv, meta;
  write_histogram_csv(csv, h);
  CHECK(csv.str().rfind("tau_ps,counts,g2,sigma\n", 0) == 0);
  write_histogram_metadata(meta, h);
  CHECK(meta.str().find("accidental_level") != std::string::npos);
}
