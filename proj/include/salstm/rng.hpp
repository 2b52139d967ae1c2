#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace salstm {

// Seeded generator with a fixed output stream. All derived draws below are
// spelled out explicitly; std::uniform_* distributions are avoided because
// their value mapping is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // {0, ..., n-1}, n >= 1
  uint64_t below(uint64_t n) {
    uint64_t lim = ~uint64_t{0} - ~uint64_t{0} % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= lim);
    return x % n;
  }

  // inclusive bounds
  int range(int lo, int hi) { return lo + static_cast<int>(below(uint64_t(hi - lo + 1))); }

  bool chance(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace salstm
