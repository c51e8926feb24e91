#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polyfield {

/// Independent subsystem tags for stream derivation. Values are part of the
/// reproducibility contract: changing them changes every recorded run.
enum class Stream : std::uint64_t {
  lines = 0x11,
  arak = 0x12,
  proposals = 0x21,
  births = 0x22,
  lifetimes = 0x23,
  acceptance = 0x24,
  walks = 0x31,
  environment = 0x32,
  tilts = 0x41,
  replicas = 0x51,
};

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for replica `index` of subsystem `tag` under master seed `seed`:
/// mix64(mix64(seed ^ mix64(tag)) + index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream tag, std::uint64_t index = 0) {
  return mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(tag))) + index);
}

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
  }
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
  }
  /// Child generator seeded from this one's stream.
  Rng split() { return Rng(mix64(engine_())); }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace polyfield
