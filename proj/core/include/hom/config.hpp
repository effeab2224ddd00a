#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "hom/params.hpp"

namespace hom {

/// Flat key-value configuration shared by every command.
///
/// Text format, one `key = value` per line, `#` starts a comment. Recognised keys:
/// eta, alpha_sq, tau_coh_ps, tau_rad_ps, background_fraction, tau_coh_laser_ps,
/// pair_fwhm_ps, dark_rate_per_ps, gamma, phi_deg, R. Unknown or repeated keys are
/// errors. Keys not present keep the reference values below.
struct ModelConfig {
  double eta = 1e-3;
  double alpha_sq = 1e-3;
  double tau_coh_ps = 285.0;
  double tau_rad_ps = 985.0;
  double background_fraction = 0.04;
  double tau_coh_laser_ps = CoherentSourceParams::kDefaultCoherencePs;
  double pair_fwhm_ps = 428.0;
  double dark_rate_per_ps = 0.0;
  double gamma = 0.91;
  double phi_deg = 0.0;
  double R = 0.5;

  QuantumSourceParams quantum() const;
  CoherentSourceParams coherent() const;
  BeamSplitter splitter() const;
  DetectorResponse detector() const;
  InterferenceConfig interference() const;

  // Constructs every typed parameter; throws ValidationError on the first bad one.
  void validate() const;

  static ModelConfig paper_defaults() { return {}; }
  static ModelConfig parse(std::string_view text, std::string_view source_name = "<string>");
  static ModelConfig load(const std::filesystem::path& path);

  // 17 significant digits, all keys, in the documented order.
  std::string serialize() const;
};

// Schema version of the key set above; bumped when keys change meaning.
inline constexpr int kConfigSchemaVersion = 1;

}  // namespace hom
