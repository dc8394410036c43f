#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "udlab/common.hpp"

namespace udlab {

// splitmix64: used to whiten seeds and to derive independent per-trial seeds
// from a (base seed, trial index) pair. Trials are reproducible individually,
// which keeps parallel runs deterministic regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a2c62ed4ad3ULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream) {
  std::uint64_t s = base_seed;
  std::uint64_t a = splitmix64(s);
  s = base_seed ^ (0x9e3779b97f4a7c15ULL + stream);
  std::uint64_t b = splitmix64(s);
  // one more mixing round so that nearby (seed, stream) pairs decorrelate
  std::uint64_t c = a ^ (b + 0x2545f4914f6cdd1dULL + (stream << 1));
  return splitmix64(c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n) by 64x64 fixed-point multiplication. The bias is
  // at most n / 2^64, far below anything a simulation could resolve.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n)) >> 64);
  }

  // Sample an index from an unnormalised non-negative weight vector by a CDF
  // walk. The final bucket absorbs any rounding slack.
  int categorical(const double* weights, int count) {
    double total = 0.0;
    for (int i = 0; i < count; ++i) total += weights[i];
    if (!(total > 0.0)) throw Degenerate("categorical: weights sum to zero");
    double thresh = uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
      acc += weights[i];
      if (thresh < acc) return i;
    }
    for (int i = count - 1; i >= 0; --i) {
      if (weights[i] > 0.0) return i;
    }
    return count - 1;
  }

  int categorical(const std::vector<double>& weights) {
    return categorical(weights.data(), static_cast<int>(weights.size()));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace udlab
