#include "hom/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hom/error.hpp"

namespace hom {
namespace {

struct KeyBinding {
  std::string_view key;
  double ModelConfig::*field;
};

constexpr std::array<KeyBinding, 11> kKeys{{
    {"eta", &ModelConfig::eta},
    {"alpha_sq", &ModelConfig::alpha_sq},
    {"tau_coh_ps", &ModelConfig::tau_coh_ps},
    {"tau_rad_ps", &ModelConfig::tau_rad_ps},
    {"background_fraction", &ModelConfig::background_fraction},
    {"tau_coh_laser_ps", &ModelConfig::tau_coh_laser_ps},
    {"pair_fwhm_ps", &ModelConfig::pair_fwhm_ps},
    {"dark_rate_per_ps", &ModelConfig::dark_rate_per_ps},
    {"gamma", &ModelConfig::gamma},
    {"phi_deg", &ModelConfig::phi_deg},
    {"R", &ModelConfig::R},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

QuantumSourceParams ModelConfig::quantum() const {
  return QuantumSourceParams(eta, tau_coh_ps, tau_rad_ps, background_fraction);
}

CoherentSourceParams ModelConfig::coherent() const {
  return CoherentSourceParams(alpha_sq, tau_coh_laser_ps);
}

BeamSplitter ModelConfig::splitter() const { return BeamSplitter(R); }

DetectorResponse ModelConfig::detector() const {
  return DetectorResponse(pair_fwhm_ps, dark_rate_per_ps);
}

InterferenceConfig ModelConfig::interference() const {
  return InterferenceConfig(gamma, deg_to_rad(phi_deg));
}

void ModelConfig::validate() const {
  (void)quantum();
  (void)coherent();
  (void)splitter();
  (void)detector();
  (void)interference();
}

ModelConfig ModelConfig::parse(std::string_view text, std::string_view source_name) {
  ModelConfig cfg;
  std::set<std::string_view> seen;
  std::size_t line_no = 0;
  const auto where = [&] {
    return std::string(source_name) + ":" + std::to_string(line_no) + ": ";
  };

  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(where() + "expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    const KeyBinding* binding = nullptr;
    for (const auto& k : kKeys) {
      if (k.key == key) binding = &k;
    }
    if (binding == nullptr) {
      throw ValidationError(where() + "unknown key '" + std::string(key) + "'");
    }
    if (!seen.insert(binding->key).second) {
      throw ValidationError(where() + "duplicate key '" + std::string(key) + "'");
    }

    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
      throw ValidationError(where() + "value for '" + std::string(key) +
                            "' is not a number: '" + std::string(value) + "'");
    }
    cfg.*(binding->field) = parsed;
  }

  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(source_name) + ": " + e.what());
  }
  return cfg;
}

ModelConfig ModelConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open config file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string ModelConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& k : kKeys) {
    out << k.key << " = " << this->*(k.field) << '\n';
  }
  return out.str();
}

}  // namespace hom
