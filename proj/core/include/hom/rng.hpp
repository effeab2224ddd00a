#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hom::rng {

/// Philox4x32-10 block function (Salmon et al., SC'11): maps a 128-bit counter
/// and a 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent, reproducible stream identified by (seed, segment, substream).
/// Draw k of a stream is a pure function of those ids and k.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t segment, std::uint32_t substream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // (0, 1), never exactly 0 or 1.
  double uniform() noexcept;
  double exponential(double rate) noexcept;
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t draws() const noexcept { return block_index_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_{};
  std::uint32_t substream_ = 0;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;  // 32-bit words consumed from block_
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace hom::rng
