#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hom/mc.hpp"

namespace hom::io {

// PHTS binary layout, all little-endian:
//   "PHTS" | u16 version | repeated { u8 channel_byte, f64 time_ps }
// channel_byte low nibble: 2 = D2, 3 = D3. High nibble: origin tag (0 untagged,
// 1 dot, 2 laser, 3 dark).
inline constexpr std::uint16_t kPhtsVersion = 1;

void write_phts(std::ostream& out, const mc::TimestampStream& stream);
// Duration is not part of the format; the caller supplies it (see read_metadata).
mc::TimestampStream read_phts(std::istream& in);

// CSV `time_ps,channel[,origin]` with channel D2/D3 and origin dot/laser/dark.
void write_stream_csv(std::ostream& out, const mc::TimestampStream& stream);
mc::TimestampStream read_stream_csv(std::istream& in);

/// Run metadata written next to a stream file as `<file>.meta` (key = value text).
struct StreamMetadata {
  double duration_ps = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  bool tagged = false;
};

void write_metadata(std::ostream& out, const mc::TimestampStream& stream);
StreamMetadata read_metadata(std::istream& in);
std::filesystem::path metadata_path(const std::filesystem::path& stream_path);

/// Loads a stream by extension (.csv → CSV, anything else → PHTS). Duration comes
/// from `duration_override`, else the side-car metadata, else the last click time.
mc::TimestampStream load_stream(const std::filesystem::path& path,
                                std::optional<double> duration_override = std::nullopt);

}  // namespace hom::io
