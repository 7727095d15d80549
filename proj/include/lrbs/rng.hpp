#pragma once

#include <cstdint>

#include "lrbs/lattice.hpp"

namespace lrbs {

/// Coordinates of one uniform draw. The value is a pure function of the key.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t t = 0;
  std::uint64_t site = 0;
  std::uint64_t k = 0;  // draw index within (seed, stream, t, site)
};

/// MurmurHash3 64-bit finaliser.
constexpr std::uint64_t fmix64(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

/// h0 = 0x6a09e667f3bcc909; h <- fmix64(h ^ w) + 0x9e3779b97f4a7c15 for w in
/// (seed, stream, t, site, k); result fmix64(h).
constexpr std::uint64_t mix_key(const RngKey& key) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : {key.seed, key.stream, key.t, key.site, key.k}) h = fmix64(h ^ w) + 0x9e3779b97f4a7c15ULL;
  return fmix64(h);
}

/// Top 53 bits mapped to the open interval (0, 1): (h >> 11) 2^-53 + 2^-54.
constexpr double bits_to_uniform(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

inline double keyed_uniform(const RngKey& key) { return bits_to_uniform(mix_key(key)); }

/// Poisson(mean) using uniforms at draw indices key.k, key.k + 1, ...
/// Sequential-search inversion below mean 10 (one uniform), PTRS rejection above
/// (two uniforms per attempt). Returns 0 for mean 0 without consuming draws.
Count poisson_draw(double mean, RngKey key);

/// Seed of replica `index` derived from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_key(RngKey{master, 0xffffffffULL, index, 0x5eedULL, 0});
}

/// A seed and stream id; draws are addressed by (t, site, k).
class RngKeyStream {
 public:
  RngKeyStream() = default;
  explicit RngKeyStream(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  RngKeyStream with_stream(std::uint64_t stream) const { return RngKeyStream(seed_, stream); }

  RngKey key(std::uint64_t t, std::uint64_t site, std::uint64_t k = 0) const { return {seed_, stream_, t, site, k}; }
  double uniform(std::uint64_t t, std::uint64_t site, std::uint64_t k = 0) const { return keyed_uniform(key(t, site, k)); }
  Count poisson(double mean, std::uint64_t t, std::uint64_t site) const { return poisson_draw(mean, key(t, site)); }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

}  // namespace lrbs
