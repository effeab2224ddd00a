#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "atomic_file.hpp"
#include "cli.hpp"
#include "doctest.h"
#include "hom/analytic.hpp"
#include "hom/config.hpp"
#include "hom/fringe.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using hom::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("homsim_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("usage, version and flag errors") {
  auto r = invoke({});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);

  r = invoke({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out == "homsim 1.0.0 (config schema 1)\n");

  r = invoke({"curves", "--bogus"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = invoke({"frobnicate"});
  CHECK(r.code == 2);

  r = invoke({"curves", "--config", "missing.cfg"});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing.cfg") != std::string::npos);

  r = invoke({"reproduce", "fig9"});
  CHECK(r.code == 2);
}

TEST_CASE("bundled profile matches the built-in defaults and the shipped file") {
  std::ifstream in(HOM_PROFILE_PATH);
  REQUIRE(in);
  std::stringstream text;
  text << in.rdbuf();
  const auto cfg = hom::ModelConfig::parse(text.str());
  const auto ref = hom::ModelConfig::paper_defaults();
  CHECK(cfg.serialize() == ref.serialize());

  const auto r = invoke({"optimum"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["gamma"].get<double>() == 0.91);
  CHECK(j["ratio_star"].get<double>() == doctest::Approx(2.2371).epsilon(1e-4));
}

TEST_CASE("config validation happens before any work") {
  TempDir dir("cfg");
  {
    std::ofstream(dir / "bad.cfg") << "gamma = 1.5\n";
    std::ofstream(dir / "typo.cfg") << "gamma = 0.9\ntau_rad = 985\n";
    std::ofstream(dir / "perp.cfg") << "phi_deg = 90\n";
  }
  auto r = invoke({"curves", "--config", dir / "bad.cfg", "--out", dir / "c.csv"});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir / "c.csv"));
  r = invoke({"curves", "--config", dir / "typo.cfg"});
  CHECK(r.code == 2);
  CHECK(r.err.find("tau_rad") != std::string::npos);

  r = invoke({"curves", "--config", dir / "perp.cfg", "--max-tau-ps", "0", "--step-ps", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0,0.7696") != std::string::npos);
  r = invoke({"curves", "--config", dir / "perp.cfg", "--phi-deg", "0", "--max-tau-ps", "0", "--step-ps", "1"});
  CHECK(r.out.find("0,0.35555") != std::string::npos);
}

TEST_CASE("mc then correlate reproduces the analytic HBT dip") {
  TempDir dir("pipeline");
  for (const char* format : {"bin", "csv"}) {
    const std::string stream = dir / (std::string("s.") + format);
    auto r = invoke({"mc", "--mode", "hbt_dot", "--seed", "1", "--duration-ps", "1e10", "--rate-per-ps", "6e-5",
                     "--format", format, "--out", stream});
    REQUIRE(r.code == 0);
    CHECK(slurp(stream + ".meta").find("seed = 1\n") != std::string::npos);
    r = invoke({"correlate", "--in", stream, "--model", "hbt_dot", "--out", dir / "h.csv"});
    REQUIRE(r.code == 0);
    const std::string meta = slurp(dir / "h.csv.meta");
    const auto pick = [&](const std::string& key) {
      const auto at = meta.find(key + " = ");
      REQUIRE(at != std::string::npos);
      return std::stod(meta.substr(at + key.size() + 3));
    };
    CHECK(pick("seed") == 1.0);
    CHECK(pick("model_chi2_per_dof") < 1.5);
    CHECK(std::abs(pick("g2_zero") - 0.1998) < 4.0 * pick("g2_zero_stderr"));
  }
}

TEST_CASE("seeded commands are reproducible from the echoed seed") {
  TempDir dir("seed");
  const std::vector<std::string> base{"mc", "--seed", "99", "--duration-ps", "1e9", "--rate-per-ps", "2e-5", "--tagged"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", dir / "a.csv"});
  b.insert(b.end(), {"--out", dir / "b.csv"});
  REQUIRE(invoke(a).code == 0);
  REQUIRE(invoke(b).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv.meta") == slurp(dir / "b.csv.meta"));
  CHECK(slurp(dir / "a.csv").rfind("time_ps,channel,origin\n", 0) == 0);
}

TEST_CASE("interrupted writes leave no partial output") {
  TempDir dir("atomic");
  const std::string target = dir / "curves.csv";
  std::ofstream(target) << "previous contents\n";
  hom::cli::write_interrupt_hook = [] { throw std::runtime_error("simulated crash"); };
  CHECK_THROWS(invoke({"curves", "--out", target}));
  hom::cli::write_interrupt_hook = nullptr;
  CHECK(slurp(target) == "previous contents\n");
  CHECK_FALSE(fs::exists(target + ".partial"));
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);

  REQUIRE(invoke({"curves", "--out", target}).code == 0);
  CHECK(slurp(target).rfind("tau_ps,g2_ideal,g2_convolved\n", 0) == 0);
}

TEST_CASE("fit-visibility report") {
  TempDir dir("fitv");
  {
    std::ofstream pts(dir / "points.csv");
    pts << "ratio,visibility,sigma\n";
    const hom::QuantumSourceParams q(1e-3, 285.0, 985.0, 0.04);
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      pts << r << ','
          << hom::analytic::visibility_convolved(r, q, hom::CoherentSourceParams(1e-3),
                                                 hom::InterferenceConfig(0.8, 0.0), hom::DetectorResponse(428.0))
          << ",0.01\n";
    }
  }
  const auto r = invoke({"fit-visibility", "--in", dir / "points.csv"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"gamma_hat", "stderr", "chi2_per_dof", "ratio_star", "v_max"}) CHECK(j.contains(key));
  CHECK(j["gamma_hat"].get<double>() == doctest::Approx(0.8).epsilon(1e-5));
  CHECK(invoke({"fit-visibility", "--in", dir / "nope.csv"}).code == 2);
}

TEST_CASE("fringe commands") {
  TempDir dir("fringe");
  auto r = invoke({"fringe-map", "--delay-max-ps", "20", "--delay-step-ps", "10", "--detuning-max-ueV", "1",
                   "--detuning-step-ueV", "1"});
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 3 * 3);

  // Piezo scan with detuning = 2·V + 1 and the true zero at detuning 0.
  const double period = hom::fringe::beat_period(380.0);
  {
    std::ofstream scan(dir / "piezo.csv");
    scan.precision(12);
    scan << "piezo_V,contrast\n";
    for (int i = 0; i < 25; ++i) {
      const double v = (-period + 2.0 * period * i / 24.0) / 2.0;
      scan << v << ',' << hom::fringe::combined_contrast(380.0, 2.0 * v + 1.0, 285.0, 1e6) << '\n';
    }
    std::ofstream flat(dir / "flat.csv");
    flat << "detuning_ueV,contrast\n";
    for (int i = 0; i < 25; ++i) flat << -period + 2.0 * period * i / 24.0 << ",0.3\n";
  }
  r = invoke({"fringe-fit", "--in", dir / "piezo.csv", "--affine", "2,1"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["zero_point"].get<double>() == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(invoke({"fringe-fit", "--in", dir / "piezo.csv"}).code == 2);
  CHECK(invoke({"fringe-fit", "--in", dir / "piezo.csv", "--affine", "0,1"}).code == 2);
  CHECK(invoke({"fringe-fit", "--in", dir / "flat.csv"}).code == 3);
}

TEST_CASE("reproduce fig1b and fig4") {
  TempDir dir("reproduce");
  auto r = invoke({"reproduce", "fig1b", "--out", dir / "f1"});
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(dir.path / "f1" / "fig1b.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "ratio,g2_parallel,g2_orthogonal,visibility");
  bool found = false;
  while (std::getline(csv, line)) {
    if (line.rfind("1,", 0) == 0) {
      found = true;
      CHECK(std::stod(line.substr(line.rfind(',') + 1)) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
    }
  }
  CHECK(found);

  r = invoke({"reproduce", "fig4", "--seed", "7", "--duration-ps", "5e9", "--out", dir / "f4"});
  REQUIRE(r.code == 0);
  const auto m = nlohmann::json::parse(slurp(dir.path / "f4" / "manifest.json"));
  CHECK(m["results"]["ratio_star"].get<double>() == doctest::Approx(2.2).epsilon(0.03));
  CHECK(m["results"]["gamma_profile"].get<double>() == 0.91);
  CHECK(m["seed"].get<int>() == 7);
  CHECK(m["profile"] == "paper-defaults");
  CHECK(m["files"].size() == 2);
}
