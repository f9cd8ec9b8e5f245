#pragma once

#include <cstdint>

namespace extrude3d {

// Counter-based deterministic random numbers. Every draw is a pure function
// of (seed, stream, counter), so generation order and thread count never
// change the output. The mixer is the splitmix64 finalizer applied twice.

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One independent random value stream addressed by (seed, stream, counter).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
      : state_(mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) ^
                     mix64(stream ^ 0x14057b7ef767814fULL) ^
                     mix64(counter))) {}

  std::uint64_t next_u64() {
    state_ = mix64(state_ + 0x2545f4914f6cdd1dULL);
    return state_;
  }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    // Lemire's multiply-shift; the slight modulo bias is irrelevant for the
    // small bounds used here and the result is platform-independent.
    unsigned __int128 product =
        static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace extrude3d
