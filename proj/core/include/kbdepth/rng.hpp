#ifndef KBDEPTH_RNG_HPP_
#define KBDEPTH_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace kbdepth {

// Thin wrapper over mt19937_64 with explicit derivations only, so sampled
// fixtures reproduce bit-for-bit on every platform (std distributions are
// implementation-defined; this avoids them).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  // Uniform-ish integer in [0, n); modulo bias is irrelevant at our scales.
  uint64_t below(uint64_t n) { return n == 0 ? 0 : eng_() % n; }

  double unit() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
  }

  bool chance(double p) { return unit() < p; }

  // k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<uint32_t> sample(uint32_t n, uint32_t k) {
    std::vector<uint32_t> pool(n);
    for (uint32_t i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    std::vector<uint32_t> out;
    out.reserve(k);
    for (uint32_t i = 0; i < k; ++i) {
      uint64_t j = i + below(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace kbdepth

#endif  // KBDEPTH_RNG_HPP_
