#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace cavityseed {

/// Reproducible random source. The engine is std::mt19937_64 (bit-exact by
/// the standard) and the distributions come from Boost.Random, whose
/// algorithms do not vary between standard library implementations.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double gaussian(double sigma) {
    return sign_ * sigma * boost::random::normal_distribution<double>()(engine_);
  }

  /// Negate every subsequent gaussian draw. Used to build mirrored noise
  /// realisations for the parity-symmetry checks.
  void set_mirrored(bool mirrored) { sign_ = mirrored ? -1.0 : 1.0; }

  friend bool operator==(const RandomSource&, const RandomSource&) = default;

 private:
  std::mt19937_64 engine_;
  double sign_ = 1.0;
};

/// Identifies the random streams of one trajectory (i, j) of an ensemble.
/// The initial condition depends only on (master_seed, init_index); the
/// cavity input noise on the full triple.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t init_index = 0;
  std::uint64_t noise_index = 0;

  RandomSource initial_state_source() const;
  RandomSource noise_source() const;
};

/// SplitMix64 finaliser, used to hash stream coordinates into seeds.
std::uint64_t mix64(std::uint64_t z);

}  // namespace cavityseed
