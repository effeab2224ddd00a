#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hom/params.hpp"

namespace hom::mc {

enum class Mode { HbtDot, HbtLaser, TwoSource };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);  // hbt_dot | hbt_laser | two_source

// Output ports of the combining beamsplitter. Values are the on-disk channel codes.
enum class Channel : std::uint8_t { D2 = 2, D3 = 3 };

// Debug labels recorded when McRunConfig::tag_origins is set.
enum class Origin : std::uint8_t { Untagged = 0, Dot = 1, Laser = 2, Dark = 3 };

struct Click {
  double time_ps;
  Channel channel;
  Origin origin;

  friend bool operator==(const Click&, const Click&) = default;
};

/// Ordered detector clicks of one run. Within each channel times are strictly
/// increasing and lie in [0, duration].
struct TimestampStream {
  std::vector<Click> clicks;
  double duration_ps = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  bool tagged = false;

  std::vector<double> channel_times(Channel ch) const;
  std::size_t count(Channel ch) const;
};

/// Everything a Monte Carlo run depends on. Rates are detected photons per ps
/// before the splitter; dot_rate includes the background fraction of q.
struct McRunConfig {
  double duration_ps = 1e9;
  double dot_rate = 1e-6;
  double laser_rate = 1e-6;
  std::uint64_t seed = 1;
  Mode mode = Mode::TwoSource;
  BeamSplitter splitter{0.5};
  InterferenceConfig ic{0.91, 0.0};
  DetectorResponse detector{428.0, 0.0};
  QuantumSourceParams quantum{1e-3, 285.0, 985.0, 0.04};
  CoherentSourceParams coherent{1e-3};
  // Disjoint time windows simulated independently with derived seeds.
  unsigned segments = 1;
  // Background photons of the dot channel interfere like signal photons when set;
  // otherwise they are treated as fully distinguishable (γ = 0).
  bool background_interferes = true;
  bool tag_origins = false;

  static constexpr double kMaxExpectedClicks = 1e9;
  // Interference partners are searched within this many coherence times.
  static constexpr double kPairWindowCoherenceTimes = 10.0;

  // Throws ValidationError for inconsistent settings.
  void validate() const;
  // Model-validity warnings that do not stop a run.
  std::vector<std::string> warnings() const;

  double expected_clicks() const;
  std::uint64_t hash() const;
};

/// Relative coincidence weight of one dot–laser pair separated by dt:
/// (R² + T²) − 2RT·γ²cos²φ·exp(−|dt|/τ_coh). Equals ½ for R = T, γ = 0.
double pair_kernel(double dt_ps, const BeamSplitter& splitter, const InterferenceConfig& ic,
                   const QuantumSourceParams& q);

/// Generates a click stream. Identical configs give bit-identical streams,
/// independent of how many threads run the segments.
TimestampStream simulate(const McRunConfig& cfg);

/// Clicks of one origin only (requires a tagged stream).
TimestampStream filter_origin(const TimestampStream& stream, Origin origin);

}  // namespace hom::mc
