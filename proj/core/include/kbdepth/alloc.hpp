#ifndef KBDEPTH_ALLOC_HPP_
#define KBDEPTH_ALLOC_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kbdepth/depth.hpp"
#include "kbdepth/kb.hpp"
#include "kbdepth/tradeoff.hpp"

namespace kbdepth {

// One cacheable formula with its storage cost in bits.
struct CandidateItem {
  Formula formula;
  std::string text;
  double cost = 0.0;
  bool cost_explicit = false;
};

struct CandidateSet {
  std::vector<CandidateItem> items;  // canonical order, deduplicated
};

// One candidate per line, `formula [@cost=BITS]`, '#' comments.  Every
// candidate must lie strictly inside the closure of `base` (derivable but
// not already a member); cost defaults to the description proxy against
// `base`.  Duplicate formulas keep the first line's cost.  With
// `require_entailed` off the closure gates are skipped, for pipelines that
// re-check derivability against a later, repaired base.
CandidateSet load_candidates(const std::string& text, const PremiseBase& base,
                             const ProofSystem& system,
                             const SymbolTable& table,
                             const SearchLimits& limits = {},
                             bool require_entailed = true);

// Expected depth saving of caching a selection S:
//   delta(S) = sum_i p_i * (Dd(q_i | B) - Dd(q_i | B u S)).
// Queries unreachable from B alone cannot gain and are excluded up front
// (reported via excluded_queries).  Evaluations are memoized per selection.
class DepthObjective {
 public:
  DepthObjective(const ProofSystem& system, const SymbolTable& table,
                 PremiseBase baseline, std::vector<WorkloadEntry> queries,
                 std::vector<Formula> items);

  size_t item_count() const { return items_.size(); }
  size_t query_count() const { return queries_.size(); }
  const std::vector<Formula>& items() const { return items_; }
  const PremiseBase& baseline() const { return baseline_; }
  const std::vector<WorkloadEntry>& queries() const { return queries_; }
  const std::vector<size_t>& excluded_queries() const { return excluded_; }

  // `selection` holds sorted distinct item indices.
  double delta(const std::vector<uint32_t>& selection);
  Depth query_depth(size_t qi, const std::vector<uint32_t>& selection);
  uint64_t evaluations() const { return evals_; }

 private:
  const std::vector<Depth>& depths_for(const std::vector<uint32_t>& selection);

  ProofSystem system_;
  SymbolTable table_;
  PremiseBase baseline_;
  std::vector<WorkloadEntry> queries_;
  std::vector<Formula> items_;
  std::vector<size_t> excluded_;
  std::vector<Depth> base_depths_;
  std::unique_ptr<DepthOracle> oracle_;
  std::map<std::vector<uint32_t>, std::vector<Depth>> memo_;
  uint64_t evals_ = 0;
};

struct Allocation {
  std::vector<uint32_t> selection;  // sorted item indices
  double delta = 0.0;
  double cost = 0.0;
  double budget = 0.0;
};

// Density-greedy selection with exhaustive small seeds: every subset of at
// most `seed_size` affordable items starts one greedy run (marginal gain per
// cost bit, ties to the smaller index), and the best filled run wins.  Runs
// fill spare budget even at zero marginal gain; final ties keep the earliest
// seed in enumeration order.
Allocation greedy_knapsack(DepthObjective& objective,
                           const std::vector<double>& costs, double budget,
                           size_t seed_size = 3);

// Exact optimum by subset enumeration; ties keep the smallest bitmask.
// Throws Errc::kTooManyCandidates past 20 items.
Allocation brute_force_opt(DepthObjective& objective,
                           const std::vector<double>& costs, double budget);

// One sampled diminishing-returns violation probe: nested A within B and an
// outside item u, compared per query and in aggregate.
struct DrTriple {
  std::vector<uint32_t> small;  // A
  std::vector<uint32_t> large;  // B, superset of A
  uint32_t added = 0;           // u, outside B
  std::string scope;            // query text or "aggregate"
  double gain_small = 0.0;
  double gain_large = 0.0;
};

struct DrReport {
  uint64_t samples = 0;
  uint64_t comparisons = 0;
  uint64_t violations = 0;
  double violation_rate = 0.0;
  std::optional<DrTriple> first_violation;
};

// Samples random nested pairs and checks marginal gains never grow with the
// context set.  Exact by exhaustion when the item count is at most
// `exhaustive_limit`; otherwise seeded sampling.
DrReport dr_check(DepthObjective& objective, uint64_t samples, uint64_t seed,
                  size_t exhaustive_limit = 0);

}  // namespace kbdepth

#endif  // KBDEPTH_ALLOC_HPP_
