#include "hom/params.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hom/error.hpp"
#include "hom/units.hpp"

namespace hom {
namespace {

double require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be finite");
  }
  return v;
}

double require_positive(double v, const char* name) {
  require_finite(v, name);
  if (v <= 0.0) throw ValidationError(std::string(name) + " must be > 0");
  return v;
}

double require_non_negative(double v, const char* name) {
  require_finite(v, name);
  if (v < 0.0) throw ValidationError(std::string(name) + " must be >= 0");
  return v;
}

double require_unit_interval(double v, const char* name) {
  require_finite(v, name);
  if (v < 0.0 || v > 1.0) throw ValidationError(std::string(name) + " must lie in [0, 1]");
  return v;
}

}  // namespace

QuantumSourceParams::QuantumSourceParams(double eta, double tau_coh_ps, double tau_rad_ps,
                                         double background_fraction)
    : eta_(require_non_negative(eta, "eta")),
      tau_coh_(require_positive(tau_coh_ps, "tau_coh_ps")),
      tau_rad_(require_positive(tau_rad_ps, "tau_rad_ps")),
      background_(require_non_negative(background_fraction, "background_fraction")) {
  if (background_ >= 1.0) {
    throw ValidationError("background_fraction must be < 1");
  }
  const double width = lorentzian_fwhm(tau_coh_);
  if (!std::isfinite(width) || width <= 0.0) {
    throw ValidationError("tau_coh_ps gives a non-finite linewidth");
  }
}

CoherentSourceParams::CoherentSourceParams(double alpha_sq, double tau_coh_laser_ps)
    : alpha_sq_(require_non_negative(alpha_sq, "alpha_sq")),
      tau_coh_laser_(require_positive(tau_coh_laser_ps, "tau_coh_laser_ps")) {}

BeamSplitter::BeamSplitter(double reflectance)
    : BeamSplitter(reflectance, 1.0 - reflectance) {}

BeamSplitter::BeamSplitter(double reflectance, double transmittance)
    : r_(require_unit_interval(reflectance, "R")),
      t_(require_unit_interval(transmittance, "T")) {
  if (std::abs(r_ + t_ - 1.0) > 1e-12) {
    throw ValidationError("beamsplitter must be lossless: R + T = 1");
  }
}

bool BeamSplitter::balanced() const noexcept { return std::abs(r_ - t_) <= 1e-12; }

DetectorResponse::DetectorResponse(double pair_fwhm_ps, double dark_rate_per_ps)
    : pair_fwhm_(require_non_negative(pair_fwhm_ps, "pair_fwhm_ps")),
      dark_rate_(require_non_negative(dark_rate_per_ps, "dark_rate_per_ps")) {}

DetectorResponse DetectorResponse::from_detector_sigma(double sigma_ps, double dark_rate_per_ps) {
  require_non_negative(sigma_ps, "detector sigma");
  return DetectorResponse(sigma_ps * std::numbers::sqrt2 * constants::kFwhmPerSigma,
                          dark_rate_per_ps);
}

double DetectorResponse::pair_sigma() const noexcept {
  return pair_fwhm_ / constants::kFwhmPerSigma;
}

double DetectorResponse::detector_sigma() const noexcept {
  return pair_sigma() / std::numbers::sqrt2;
}

InterferenceConfig::InterferenceConfig(double gamma, double phi_rad)
    : gamma_(require_unit_interval(gamma, "gamma")), phi_(require_finite(phi_rad, "phi")) {}

double InterferenceConfig::overlap_weight() const noexcept {
  const double c = std::cos(phi_);
  // cos(π/2) is 6e-17 in floating point; treat it as exactly orthogonal.
  const double c2 = std::abs(c) < 1e-15 ? 0.0 : c * c;
  return gamma_ * gamma_ * c2;
}

double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

double intensity_ratio(const QuantumSourceParams& q, const CoherentSourceParams& c) {
  if (c.alpha_sq() == 0.0) {
    throw ValidationError("intensity ratio undefined: alpha_sq is zero");
  }
  return q.eta() / c.alpha_sq();
}

double lorentzian_fwhm(double tau_coh_ps) { return 2.0 * constants::kHbarUeVps / tau_coh_ps; }

double lorentzian_fwhm(const QuantumSourceParams& q) { return lorentzian_fwhm(q.tau_coh()); }

}  // namespace hom
