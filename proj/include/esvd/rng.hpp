#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace esvd {

// Deterministic RNG with a fixed cross-platform mapping from engine output to
// doubles, so reports are byte-identical regardless of standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal();

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  // Fisher-Yates shuffle, identical order on every platform.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace esvd
