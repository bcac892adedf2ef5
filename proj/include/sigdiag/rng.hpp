#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sigdiag {

// Deterministic random source. Only the mt19937_64 engine is taken from the
// standard library (its output sequence is pinned by the standard); the value
// mappings live here so streams reproduce bit-for-bit across platforms and
// standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. No spare is cached, so every call
  // consumes exactly two engine draws.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  // Independent child stream. Forking depends only on the construction seed
  // and the stream id, not on how much the parent has drawn, so work split
  // across forks (e.g. one per fold) is order-independent.
  Rng fork(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sigdiag
