#include "cavityseed/rng.hpp"

namespace cavityseed {

namespace {

constexpr std::uint64_t kInitTag = 0x1d8e4e27c47d124fULL;
constexpr std::uint64_t kNoiseTag = 0x6a09e667f3bcc909ULL;

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RandomSource RngStream::initial_state_source() const {
  return RandomSource(combine(combine(mix64(master_seed), kInitTag), init_index));
}

RandomSource RngStream::noise_source() const {
  return RandomSource(combine(
      combine(combine(mix64(master_seed), kNoiseTag), init_index), noise_index));
}

}  // namespace cavityseed
