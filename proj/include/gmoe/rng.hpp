#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace gmoe {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream seed for (base seed, stream index). Used to hand one
// RNG stream to each worker/chunk so results do not depend on thread count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t stream = 0) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return derive_seed(seed ^ h, stream);
}

// xoshiro256** with all distributions implemented in-house so that streams
// are bit-identical across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound >= 1; rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard Gaussian, Box-Muller with a cached spare.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Floyd's algorithm: k distinct values from [0, population), returned sorted.
std::vector<int> floyd_sample(Rng& rng, int population, int k);

// Fisher-Yates shuffle of the identity permutation of [0, n).
std::vector<int> random_permutation(Rng& rng, int n);

// Visit every index of [0, len) that passes an independent Bernoulli(p) test,
// in increasing order, via geometric skips. O(#hits) expected draws.
template <typename F>
void bernoulli_hits(Rng& rng, std::uint64_t len, double p, F&& hit) {
  if (len == 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < len; ++i) hit(i);
    return;
  }
  const double log1mp = std::log1p(-p);
  std::uint64_t i = 0;
  for (;;) {
    double u;
    do {
      u = 1.0 - rng.uniform01();  // (0, 1]
    } while (u <= 0.0);
    const double skip = std::floor(std::log(u) / log1mp);
    if (skip >= static_cast<double>(len - i)) return;
    i += static_cast<std::uint64_t>(skip);
    hit(i);
    if (++i >= len) return;
  }
}

}  // namespace gmoe
