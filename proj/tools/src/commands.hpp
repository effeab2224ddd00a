#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "hom/analytic.hpp"
#include "hom/config.hpp"
#include "hom/mc.hpp"

namespace hom::cli {

// Bundled profile when `path` is empty, otherwise the file; --phi-deg wins over both.
ModelConfig load_model(const std::string& path, std::optional<double> phi_deg);
std::string profile_label(const std::string& path);

nlohmann::ordered_json config_json(const ModelConfig& cfg);
std::string version_string();

// Writes atomically to `path`, or to `out` when `path` is empty.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body);

// Splits a total detected rate between dot and laser by η/α² (two-source mode).
mc::McRunConfig make_run(const ModelConfig& cfg, mc::Mode mode, double total_rate_per_ps,
                         double duration_ps, std::uint64_t seed);

// Analytic convolved correlation expected for a stream of the given mode.
analytic::CorrelationCurve model_curve(mc::Mode mode, const ModelConfig& cfg, double half_span_ps);

struct ReproduceOptions {
  std::string figure;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  std::optional<double> duration_ps;
  double bin_ps = 64.0;
  std::string profile;
};

void reproduce(const ModelConfig& cfg, const ReproduceOptions& opts, std::ostream& out);

}  // namespace hom::cli
