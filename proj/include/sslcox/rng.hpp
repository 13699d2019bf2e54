#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sslcox {

// splitmix64 finalizer, used to derive decorrelated sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix_seed(seed ^ mix_seed(tag));
}

// Deterministic generator. std::mt19937_64 output is pinned by the standard;
// the distributions below avoid std::*_distribution, whose algorithms are
// implementation-defined, so streams reproduce bit-for-bit everywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  // uniform on (0,1), never exactly 0 or 1
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Box-Muller (consumes two uniforms per draw)
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double exponential() { return -std::log(uniform()); }

  // integer in [0, n), unbiased
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // independent stream keyed by (construction seed, tag)
  Rng spawn(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace sslcox
