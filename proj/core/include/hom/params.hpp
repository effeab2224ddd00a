#pragma once


namespace hom {

/// Quantum-dot source: detection weight, first-order coherence time, radiative
/// lifetime and the summed background + dark fraction of its signal.
class QuantumSourceParams {
 public:
  QuantumSourceParams(double eta, double tau_coh_ps, double tau_rad_ps,
                      double background_fraction);

  double eta() const noexcept { return eta_; }
  double tau_coh() const noexcept { return tau_coh_; }
  double tau_rad() const noexcept { return tau_rad_; }
  double background_fraction() const noexcept { return background_; }

 private:
  double eta_;
  double tau_coh_;
  double tau_rad_;
  double background_;
};

/// Attenuated laser. alpha_sq > 0.1 leaves the two-photon truncation regime;
/// that is flagged, not rejected.
class CoherentSourceParams {
 public:
  static constexpr double kDefaultCoherencePs = 1e6;
  static constexpr double kWeakFieldLimit = 0.1;

  explicit CoherentSourceParams(double alpha_sq,
                                double tau_coh_laser_ps = kDefaultCoherencePs);

  double alpha_sq() const noexcept { return alpha_sq_; }
  double tau_coh_laser() const noexcept { return tau_coh_laser_; }
  bool outside_weak_field() const noexcept { return alpha_sq_ > kWeakFieldLimit; }

 private:
  double alpha_sq_;
  double tau_coh_laser_;
};

/// Lossless beamsplitter, R + T = 1.
class BeamSplitter {
 public:
  explicit BeamSplitter(double reflectance = 0.5);
  BeamSplitter(double reflectance, double transmittance);

  double R() const noexcept { return r_; }
  double T() const noexcept { return t_; }
  bool balanced() const noexcept;

 private:
  double r_;
  double t_;
};

/// Gaussian timing response of the detector pair plus per-detector dark rate.
class DetectorResponse {
 public:
  explicit DetectorResponse(double pair_fwhm_ps, double dark_rate_per_ps = 0.0);

  static DetectorResponse from_detector_sigma(double sigma_ps, double dark_rate_per_ps = 0.0);

  double pair_fwhm() const noexcept { return pair_fwhm_; }
  double dark_rate() const noexcept { return dark_rate_; }
  // Standard deviation of the pair-difference response.
  double pair_sigma() const noexcept;
  // Per-detector jitter: pair_sigma / sqrt(2).
  double detector_sigma() const noexcept;

 private:
  double pair_fwhm_;
  double dark_rate_;
};

/// Wave-function overlap and relative polarization angle (radians).
class InterferenceConfig {
 public:
  InterferenceConfig(double gamma, double phi_rad);

  double gamma() const noexcept { return gamma_; }
  double phi() const noexcept { return phi_; }
  // γ²cos²φ, the depth of the two-photon dip.
  double overlap_weight() const noexcept;

 private:
  double gamma_;
  double phi_;
};

double deg_to_rad(double deg) noexcept;
double rad_to_deg(double rad) noexcept;

/// η / α².
double intensity_ratio(const QuantumSourceParams& q, const CoherentSourceParams& c);

/// Lorentzian linewidth 2ħ/τ_coh in µeV.
double lorentzian_fwhm(const QuantumSourceParams& q);
double lorentzian_fwhm(double tau_coh_ps);

}  // namespace hom
