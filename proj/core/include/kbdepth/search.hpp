#ifndef KBDEPTH_SEARCH_HPP_
#define KBDEPTH_SEARCH_HPP_

#include <cstdint>
#include <vector>

#include "kbdepth/trace.hpp"

namespace kbdepth {

struct SearchLimits {
  uint64_t node_budget = 1000000;  // BFS states before degrading to a bound
  uint64_t tie_cap = 100000;       // shortest-derivation combinations to enumerate
};

struct ShortestTraceResult {
  uint64_t length = 0;      // minimal step count, or a certified upper bound
  bool exact = true;
  DerivationTrace trace;    // replays to q with `length` steps
};

// Minimal trace length N(q|base): the smallest number of distinct derived
// formulas needed to reach q, found by breadth-first search over derivation
// sets (pool reuse makes repeated conclusions pointless).  Exceeding the node
// budget degrades to the depth-witness upper bound with exact = false.
// Throws Errc::kUnreachableQuery when q is outside the closure.
ShortestTraceResult min_trace_length(const Formula& q, const PremiseBase& base,
                                     const ProofSystem& system,
                                     const SearchLimits& limits = {});

enum class EssMode { kExact, kSampled };

struct EssResult {
  std::vector<Formula> atoms;  // union of base premises over shortest traces
  uint64_t n = 0;              // trace length the union ranges over
  bool n_exact = true;
  bool exact = false;          // false = approximation (subset of the union)
};

// Eventual essential support: base formulas referenced by at least one
// shortest trace of q.  Exact mode enumerates every minimal derivation set
// and every acyclic justification assignment, up to the tie cap; past the
// cap (or in sampled mode) it returns the union over the traces it did see.
EssResult ess_plus(const Formula& q, const PremiseBase& base,
                   const ProofSystem& system, EssMode mode = EssMode::kExact,
                   const SearchLimits& limits = {});

}  // namespace kbdepth

#endif  // KBDEPTH_SEARCH_HPP_
