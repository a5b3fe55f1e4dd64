#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace otvm::core {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937_64 with hand-rolled distributions so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : g_(seed) {}

  uint64_t next_u64() { return g_(); }

  // uniform in [0, 1)
  double unit() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // inclusive bounds, rejection-free via 53-bit real (biases < 2^-40 for
  // the small ranges used here)
  int uniform_int(int lo, int hi) {
    int span = hi - lo + 1;
    int v = lo + (int)(unit() * span);
    return v >= hi ? hi : v;
  }

  bool bernoulli(double p) { return unit() < p; }

  // Box-Muller with cached spare
  double normal(double mean = 0.0, double sd = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + sd * spare_;
    }
    double u1 = 0.0, u2 = 0.0;
    do {
      u1 = unit();
    } while (u1 <= 1e-300);
    u2 = unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + sd * r * std::cos(a);
  }

  // independent stream derived from this one's seed lineage
  Rng fork(uint64_t stream) {
    return Rng(splitmix64(g_() ^ splitmix64(stream)));
  }

 private:
  std::mt19937_64 g_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace otvm::core
