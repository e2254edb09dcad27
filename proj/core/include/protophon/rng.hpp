#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "protophon/errors.hpp"

namespace protophon {

// Deterministic RNG wrapper. mt19937_64's output sequence is pinned by the
// standard, but std::uniform_*_distribution is not, so all draws go through
// the explicit mappings below. Same seed -> same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Derived stream keyed off (seed, salt) via splitmix64; decorrelated from
  // the parent and from siblings, independent of parent draw position.
  Rng fork(std::uint64_t salt) const {
    std::uint64_t z = seed_ + (salt + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, n). Rejection sampling keeps it exactly uniform.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw Error("uniform_index: empty range");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

  // Uniform integer in [lo, hi] inclusive.
  long uniform_int(long lo, long hi) {
    if (hi < lo) throw Error("uniform_int: empty range");
    return lo + static_cast<long>(
                    uniform_index(static_cast<std::size_t>(hi - lo) + 1));
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform_real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Index draw proportional to non-negative weights.
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0)) throw Error("weighted_index: zero total weight");
    double u = uniform_real() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace protophon
