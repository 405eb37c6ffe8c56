// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Self-contained pseudo-random generators with fully specified arithmetic.
// Results are bit-identical across platforms and runs for a given seed,
// which the walker simulator relies on for reproducible histograms.

namespace scf {

struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ by Blackman and Vigna, public domain reference algorithm.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& word : s_) word = sm.next();
    // All-zero state is invalid; splitmix output makes this effectively
    // impossible, the guard is for belt and braces.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 1;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53 significant bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// Derives an independent stream for one walker. Streams for consecutive
// indices share no state, so partitioning walkers over threads cannot
// change any walker's trajectory.
inline Xoshiro256pp walker_rng(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 sm{seed ^ (index * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL)};
  return Xoshiro256pp{sm.next()};
}

// Standard normal via Box-Muller; caches the second value of each pair.
class GaussianSampler {
 public:
  double sample(Xoshiro256pp& rng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - rng.uniform01();  // (0, 1], keeps log finite
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scf
