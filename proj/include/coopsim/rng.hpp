#pragma once

#include <cmath>
#include <cstdint>

namespace coopsim {

// Finalizer from splitmix64; full-avalanche 64-bit mix.
inline constexpr std::uint64_t avalanche64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child seed for run/point substreams.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0) {
  std::uint64_t s = seed;
  s = avalanche64(s + 0x9e3779b97f4a7c15ULL * (a + 1));
  s = avalanche64(s + 0x9e3779b97f4a7c15ULL * (b + 1));
  return s;
}

// xoshiro256++ with splitmix64 seeding. Two optional stream ids select
// decorrelated substreams of the same seed, so per-node / per-anchor draws are
// reproducible no matter how the surrounding loops are ordered or parallelized.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_a = 0, std::uint64_t stream_b = 0) {
    std::uint64_t s = derive_seed(seed, stream_a, stream_b);
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      word = avalanche64(s);
    }
    state_[0] |= 1;  // the all-zero state is the one forbidden xoshiro state
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Box-Muller, cosine branch only: every normal consumes exactly two uniforms,
  // which keeps substream layouts stable when code around a draw changes.
  double normal(double mu, double sigma) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return mu + sigma * r * std::cos(2.0 * kPi * u2);
  }

  // Normal clipped to mu +/- bound by rejection; falls back to a hard clamp
  // if an extreme sigma starves the acceptance region.
  double truncated_normal(double mu, double sigma, double bound) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = normal(mu, sigma);
      if (std::abs(x - mu) <= bound) return x;
    }
    const double x = normal(mu, sigma);
    return std::min(std::max(x, mu - bound), mu + bound);
  }

  // Knuth's product method; fine for the small lambdas used here.
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace coopsim
