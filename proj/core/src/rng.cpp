#include "hom/rng.hpp"

#include <cmath>
#include <numbers>

namespace hom::rng {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t segment, std::uint32_t substream) noexcept
    : substream_(substream) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(segment + 0x5851F42D4C957F2DULL));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void Stream::refill() noexcept {
  block_ = philox4x32({static_cast<std::uint32_t>(block_index_),
                       static_cast<std::uint32_t>(block_index_ >> 32), substream_, 0},
                      key_);
  ++block_index_;
  used_ = 0;
}

Stream::result_type Stream::operator()() noexcept {
  if (used_ > 2) refill();
  const std::uint64_t v = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return v;
}

double Stream::uniform() noexcept {
  // 53 random bits, offset by half an ulp so the result is never 0.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

double Stream::normal() noexcept {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Box–Muller: deterministic draw count per pair, unlike rejection methods.
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

}  // namespace hom::rng
