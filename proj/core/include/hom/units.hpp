#pragma once

#include <cmath>
#include <numbers>

// Repository-wide units: time in ps, energy in µeV, rates in counts/ps.
namespace hom::constants {

inline constexpr double kHbarUeVps = 658.2119569;  // reduced Planck constant, µeV·ps
inline constexpr double kPlanckUeVps = 4135.667697;  // µeV·ps

// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

}  // namespace hom::constants
