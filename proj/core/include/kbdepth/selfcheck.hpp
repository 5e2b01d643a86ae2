#ifndef KBDEPTH_SELFCHECK_HPP_
#define KBDEPTH_SELFCHECK_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kbdepth/kb.hpp"
#include "kbdepth/rng.hpp"
#include "kbdepth/search.hpp"

namespace kbdepth {

// Independent depth oracle: naive fixpoint stages, no priority queue, no
// frontier bookkeeping.  An atom's depth is the first stage that derives it.
std::vector<std::pair<GroundAtom, int64_t>> naive_atom_depths(
    const PremiseBase& base, const ProofSystem& system,
    const std::vector<std::string>& constants);

// Small random instance: 2-4 constants, mixed-arity predicates, random
// ground facts, range-restricted rules, and a few stored conjunctions.
KnowledgeBase random_kb(Rng& rng);

// Random singleton-body chain/tree instance plus a workload and candidate
// pool, the family on which the saving objective provably has diminishing
// returns (depth there is a minimum of per-source path lengths).
struct TreeInstance {
  KnowledgeBase kb;
  std::vector<std::string> queries;     // derivable atoms
  std::vector<double> probs;            // normalized
  std::vector<std::string> candidates;  // derivable non-members
};
TreeInstance random_tree_instance(Rng& rng);

struct CheckFailure {
  std::string invariant;
  uint64_t instance = 0;
  std::string detail;
};

struct SelfCheckReport {
  uint64_t instances = 0;
  uint64_t checks = 0;
  std::map<std::string, uint64_t> per_invariant;
  std::vector<CheckFailure> failures;
  bool ok() const { return failures.empty(); }
};

struct SelfCheckOptions {
  uint64_t instances = 20;
  uint64_t seed = 1;
  SearchLimits limits;
};

// Cross-implementation invariant battery over random instances: closure
// against naive stages, queue depths against stage depths, codec round
// trips, length bounds, support/locality sanity, perturbation inequalities,
// greedy-versus-exact allocation on the diminishing-returns family, and the
// coding checks.  Any violation lands in `failures` with a repro detail.
SelfCheckReport run_selfcheck(const SelfCheckOptions& opts = {});

}  // namespace kbdepth

#endif  // KBDEPTH_SELFCHECK_HPP_
