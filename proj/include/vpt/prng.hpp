#pragma once

#include <cstdint>

namespace vpt {

/// xorshift64* stream used by `random` domains. Fixed so that a seed pins the
/// generated axis on every platform.
class Xorshift64Star {
 public:
  static constexpr std::uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kMultiplier = 2685821657736338717ULL;

  explicit Xorshift64Star(std::uint64_t seed) : state_(seed ^ kSeedMix) {
    if (state_ == 0) state_ = kSeedMix;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * kMultiplier;
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double next_unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

 private:
  std::uint64_t state_;
};

}  // namespace vpt
