#ifndef KBDEPTH_CENSUS_HPP_
#define KBDEPTH_CENSUS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "kbdepth/depth.hpp"
#include "kbdepth/kb.hpp"

namespace kbdepth {

// Count of queries at exact inference cost n over a base of m independent
// atoms, compared against the lower bound 2^((1-delta0) * n * log2(m+n)).
struct RichnessCensus {
  uint64_t m = 0;
  uint64_t n = 0;
  double delta0 = 0.0;
  // m * (m-1) * ... * (m-n); saturates at uint64 max (log form stays exact).
  uint64_t count = 0;
  bool count_saturated = false;
  double log2_count = 0.0;  // -inf encoded as lowest() when count == 0
  double bound_log2 = 0.0;
  bool satisfied = false;
  // Exhaustive verification by direct query enumeration (small m, n only).
  bool enumerated = false;
  uint64_t enumerated_count = 0;
  bool enumeration_matches = false;
};

RichnessCensus richness_census(uint64_t m, uint64_t n, double delta0);

// One sampled query from the m-atom family: a conjunction of sqrt(m)+1
// distinct atoms, which must sit at depth exactly sqrt(m).
struct TightnessSample {
  std::vector<uint32_t> picked;  // sorted atom indices
  int64_t depth = 0;
  size_t trace_bits = 0;
  double ratio = 0.0;  // trace_bits / (n * log2 m)
};

struct TightnessSuite {
  uint64_t m = 0;
  uint64_t n = 0;  // floor(sqrt(m))
  uint64_t samples = 0;
  uint64_t seed = 0;
  bool all_depths_ok = false;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double denominator = 0.0;  // n * log2 m
  std::vector<TightnessSample> rows;
};

// Requires m >= 4 so that n >= 2 and n+1 <= m.
TightnessSuite tightness_suite(uint64_t m, uint64_t samples, uint64_t seed);

// The m independent nullary atoms e0..e{m-1} used by both drivers above.
KnowledgeBase independent_base(uint64_t m);

}  // namespace kbdepth

#endif  // KBDEPTH_CENSUS_HPP_
