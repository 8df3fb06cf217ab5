#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace tempseg {

// splitmix64 finalizer, used both as a mixer for seed derivation and as the
// core of the uniform generator below.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_str(std::string_view s) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Derive an independent stream seed from a base seed plus identifiers.
/// Reproducible regardless of iteration order over the dataset.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name, std::uint64_t index = 0) {
  return mix64(base ^ mix64(hash_str(name)) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

/// Small counter-based PRNG (splitmix64). Deterministic across platforms and
/// standard-library versions, which std::normal_distribution is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() { return mix64(state_++ ^ inc_); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  bool coin() { return (next_u64() & 1u) != 0; }

  // Box-Muller; one value per call, pairs are not cached so draws stay
  // independent of call parity.
  double normal(double mu = 0.0, double sigma = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0x6a09e667f3bcc909ULL;
};

}  // namespace tempseg
