#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "lgcpsynth/common.hpp"

namespace lgcp {

// Deterministic RNG: the mt19937_64 engine is fully specified by the standard,
// and all variate transforms are written out here so that streams are
// byte-reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1); never returns 0 or 1.
  double uniform01() {
    const double u = (next_u64() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; the spare value is cached, so draws come in deterministic pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double m = std::sqrt(-2.0 * std::log(u1));
    spare_ = m * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return m * std::cos(2.0 * M_PI * u2);
  }

  double exponential() { return -std::log(uniform01()); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Rejection from the top to avoid modulo bias.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Splits a master seed into a per-step seed keyed by a label. Recorded in
// output manifests so every artifact can be regenerated independently.
inline uint64_t derive_seed(uint64_t master, std::string_view label) {
  uint64_t h = fnv1a64(label.data(), label.size());
  uint64_t z = master ^ h;
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace lgcp
