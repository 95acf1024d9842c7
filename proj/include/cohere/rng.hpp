#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace cohere {

// SplitMix64 step; also the rule for deriving independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic generator with portable distributions. std::mt19937 is
// portable but the standard distributions are not, so everything that must
// reproduce bit-exactly across platforms goes through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0); }

  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  double next_gaussian() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent stream for worker `index` (per tree, per seed run, ...).
  Rng child(std::uint64_t index) const { return Rng(state_ ^ (0x632be59bd9b4e019ULL * (index + 1))); }

 private:
  std::uint64_t state_;
};

}  // namespace cohere
