#pragma once

#include <cmath>
#include <cstdint>

namespace oran {

// Deterministic PRNG (xoshiro256++) with hand-rolled distributions so that
// identical seeds give identical streams on every platform and compiler.
// std::random distributions are implementation-defined and would break the
// byte-identical-output contract of the harness.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state.
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
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

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; fixed two-draw consumption per call.
  double normal(double mean, double sigma) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Knuth for small means, normal approximation beyond (means here are tiny:
  // a handful of packet arrivals per TTI).
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > limit);
      return k - 1;
    }
    const double draw = std::round(normal(mean, std::sqrt(mean)));
    return draw < 0.0 ? 0 : static_cast<std::uint64_t>(draw);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

// Named substreams. Every consumer of randomness in a run owns its own
// stream so that unrelated components never perturb each other's draws.
enum class StreamId : std::uint64_t {
  kTopology = 1,
  kTraffic = 2,   // per (bs, slice)
  kPolicy = 3,    // per bs: epsilon-greedy draws
  kTraining = 4,  // per bs: replay sampling
  kInit = 5,      // per (bs, model role)
  kRunSeed = 6,   // sweep: per-run seed derivation
};

inline Rng make_stream(std::uint64_t master_seed, StreamId id,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t x = master_seed;
  Rng::splitmix64(x);
  x ^= 0x6a09e667f3bcc909ULL * static_cast<std::uint64_t>(id);
  Rng::splitmix64(x);
  x ^= 0xbb67ae8584caa73bULL * (a + 1);
  Rng::splitmix64(x);
  x ^= 0x3c6ef372fe94f82bULL * (b + 1);
  return Rng(Rng::splitmix64(x));
}

inline std::uint64_t derive_seed(std::uint64_t master_seed, StreamId id,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t x = master_seed;
  Rng::splitmix64(x);
  x ^= 0x6a09e667f3bcc909ULL * static_cast<std::uint64_t>(id);
  Rng::splitmix64(x);
  x ^= 0xbb67ae8584caa73bULL * (a + 1);
  Rng::splitmix64(x);
  x ^= 0x3c6ef372fe94f82bULL * (b + 1);
  return Rng::splitmix64(x);
}

}  // namespace oran
