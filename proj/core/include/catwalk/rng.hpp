#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace catwalk {

// Seedable random stream. Every consumer that must be reproducible under
// parallel scheduling derives its own stream from a base seed and a key path
// instead of sharing one generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  static Rng derive(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix(base ^ 0x63617477616c6b00ULL);
    for (auto k : keys) h = mix(h ^ mix(k + 0x9e3779b97f4a7c15ULL));
    return Rng(h);
  }

  void reseed(std::uint64_t seed) { engine_.seed(mix(seed)); }

  // splitmix64 finalizer: spreads nearby seeds across the state space.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  double normal() {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace catwalk
