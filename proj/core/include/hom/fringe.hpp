#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace hom::fringe {

/// Michelson setting: zero-delay contrast A₀, interferometer delay and the
/// energy detuning between the two sources.
class MichelsonConfig {
 public:
  MichelsonConfig(double a0, double delay_ps, double detuning_ueV = 0.0);

  double a0() const noexcept { return a0_; }
  double delay() const noexcept { return delay_; }
  double detuning() const noexcept { return detuning_; }

 private:
  double a0_;
  double delay_;
  double detuning_;
};

enum class ScanAxis { DetuningUeV, PiezoVolts };

/// Fringe contrast measured while the laser is tuned. `position` is in µeV or
/// volts depending on `axis`; `sigma` is empty or one standard deviation per point.
struct ContrastScan {
  ScanAxis axis = ScanAxis::DetuningUeV;
  std::vector<double> position;
  std::vector<double> contrast;
  std::vector<double> sigma;
};

/// A₀·exp(−|t|/τ_coh).
double single_source_contrast(double delay_ps, double tau_coh_ps, double a0 = 1.0);

/// Envelope of two equal-intensity fringe patterns detuned by ΔE, normalised to A₀:
/// ½·√(a_d² + a_l² + 2·a_d·a_l·cos(ΔE·t/ħ)).
double combined_contrast(double delay_ps, double detuning_ueV, double tau_coh_dot_ps,
                         double tau_coh_laser_ps);
double combined_contrast(const MichelsonConfig& cfg, double tau_coh_dot_ps,
                         double tau_coh_laser_ps);

/// Beat period h/t in µeV. Throws for t = 0.
double beat_period(double delay_ps);

struct DetuningFitOptions {
  // Starting µeV-per-unit for the position axis (1 for µeV scans, the affine slope for volts).
  double initial_scale = 1.0;
  // Position where zero detuning is expected; the reported zero point is the
  // contrast maximum closest to it.
  double prior_zero_point = 0.0;
  int phase_starts = 16;
  int max_iterations = 200;
};

/// Result of fitting A·combined_contrast(t, scale·x + offset) to a scan.
struct DetuningFit {
  double offset_ueV = 0.0;       // detuning at position 0
  double offset_stderr = 0.0;    // µeV
  double scale = 0.0;            // µeV per position unit, > 0
  double scale_stderr = 0.0;
  double amplitude = 0.0;        // fitted A₀
  double zero_point = 0.0;       // position of zero detuning
  double zero_point_stderr_ueV = 0.0;  // zero-point uncertainty expressed in energy
  double chi2 = 0.0;
  double chi2_per_dof = 0.0;
  int iterations = 0;
};

/// Least-squares fit of the beat model to a scan. cfg supplies the delay and the
/// A₀ start value. Throws ValidationError for < 8 points, DegenerateScanError when
/// the scan has no modulation or spans less than half a beat period, and
/// NonConvergenceError if no start converges.
DetuningFit fit_detuning(const ContrastScan& scan, const MichelsonConfig& cfg,
                         double tau_coh_dot_ps, double tau_coh_laser_ps,
                         const DetuningFitOptions& opts = {});

/// Reads `detuning_ueV,contrast[,sigma]` or `piezo_V,contrast[,sigma]` CSV.
ContrastScan read_scan_csv(std::istream& in);
void write_scan_csv(std::ostream& out, const ContrastScan& scan);

/// Contrast grid for every (delay, detuning) pair: CSV `delay_ps,detuning_ueV,contrast`.
void write_contrast_map_csv(std::ostream& out, std::span<const double> delays_ps,
                            std::span<const double> detunings_ueV, double tau_coh_dot_ps,
                            double tau_coh_laser_ps);

}  // namespace hom::fringe
