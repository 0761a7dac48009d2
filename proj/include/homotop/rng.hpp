#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "homotop/common.hpp"

namespace homotop {

// splitmix64 (Steele/Lea/Flood). Chosen as the project-wide generator because
// its output is fully specified by the seed, independent of platform and
// standard library. Every randomized stage derives its stream from one master
// seed through derive_seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1], safe as a log() argument
  double uniform01_open_low() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // unbiased uniform integer in [0, n) by rejection
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw validation_error("SplitMix64::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  // standard normal via Box-Muller (two fresh uniforms per call; no cached
  // spare, so the stream position is a pure function of the call count)
  double normal() {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named sub-seed derivation: one master seed fans out into independent,
// order-insensitive streams ("channels/A", "tsne/D/ch3", "perm/17", ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
  return SplitMix64(master ^ fnv1a64(name)).next();
}

// count distinct indices from [0, n), returned in ascending order
inline std::vector<int> sample_without_replacement(int n, int count,
                                                   std::uint64_t seed) {
  if (count < 0 || count > n)
    throw validation_error("sample_without_replacement: count out of range");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  SplitMix64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace homotop
