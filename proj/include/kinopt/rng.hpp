#ifndef KINOPT_RNG_HPP
#define KINOPT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace kinopt {

// Counter-based stream: the k-th output of a stream with identity `key` is
// mix64(key + k*gamma), i.e. splitmix64 keyed at `key`. Substream keys are
// derived from (key, index) only, never from the current position, so handing
// substream(i) to particle i yields the same numbers no matter which thread
// consumes them or how far the parent stream has advanced.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix64(seed ^ 0x6b696e6f70745351ull)) {}

  /// Stable, statistically independent stream for particle/slot `index`.
  RngStream substream(std::uint64_t index) const {
    return RngStream(from_key{}, mix64(key_ ^ mix64(0x9E6D62D06F6A4C15ull + (index + 1) * kGamma)));
  }

  /// One-off child stream; advances this stream.
  RngStream split() { return RngStream(from_key{}, next_u64()); }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  /// Uniform on [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; safe under log().
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard Gaussian via Box-Muller; the paired value is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double a = kTwoPi * uniform();
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  struct from_key {};
  RngStream(from_key, std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kTwoPi = 6.283185307179586476925286766559;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace kinopt

#endif
