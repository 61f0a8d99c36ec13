#pragma once

#include <cstdint>
#include <limits>

namespace franson {

/// Counter-based random stream. Every draw is a pure function of
/// (seed, trial, purpose, counter), so a trial's randomness does not depend
/// on which worker runs it or in what order.
///
/// The mixing function is the SplitMix64 finalizer; the stream itself is a
/// SplitMix64 sequence whose starting point is derived from the key.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  /// Independent sub-streams used inside one trial.
  enum class Purpose : std::uint64_t {
    Source = 1,
    DetectorA = 2,
    DetectorB = 3,
    ResolveA = 4,
    ResolveB = 5,
    Calibration = 6,
  };

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed)) {}
  CounterRng(std::uint64_t seed, std::uint64_t trial, Purpose purpose)
      : key_(mix(mix(seed) ^ mix(trial * 0xD1B54A32D192ED03ULL +
                                 static_cast<std::uint64_t>(purpose) * 0xABC98388FB8FAC03ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace franson
