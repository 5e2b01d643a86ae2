#ifndef KBDEPTH_NOISE_HPP_
#define KBDEPTH_NOISE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kbdepth/alloc.hpp"
#include "kbdepth/depth.hpp"
#include "kbdepth/kb.hpp"
#include "kbdepth/tradeoff.hpp"

namespace kbdepth {

// A corruption of the clean base: dropped members plus foreign additions.
struct NoiseSpec {
  std::vector<Formula> lost;      // subset of the clean base
  std::vector<Formula> spurious;  // disjoint from the clean base
  bool generated = false;
  double loss_rate = 0.0;
  double pollution_rate = 0.0;
  uint64_t seed = 0;
};

// JSON, either explicit  {"lost": [...], "spurious": [...]}  or sampled
// {"loss_rate": p, "pollution_rate": r, "seed": s}; mixing the two forms is
// an error.  Sampling drops each base member with probability p and adds
// round(r * m) distinct non-member atoms from the Herbrand universe.
NoiseSpec load_noise_spec(const std::string& text, const KnowledgeBase& kb);

struct NoisyBase {
  PremiseBase observed;   // (clean \ lost) plus spurious
  PremiseBase preserved;  // clean \ lost
  size_t m = 0;           // clean size
  size_t m_tilde = 0;     // observed size
};

// Validates the spec against the clean base (lost must be members, spurious
// must not be) and materializes both perturbed bases.
NoisyBase apply_noise(const PremiseBase& clean, const NoiseSpec& spec,
                      const SymbolTable& table);

// Worst lost member: max over lost b of Dd(b | clean \ lost).  Unreachable
// means some lost premise cannot be rebuilt from what survived.
Depth reconstruction_depth(const PremiseBase& clean, const NoiseSpec& spec,
                           const ProofSystem& system,
                           const SymbolTable& table);

struct PerturbationReport {
  Depth clean_depth;      // against the clean base
  Depth preserved_depth;  // against clean \ lost
  Depth noisy_depth;      // against the observed base
  Depth recovery_depth;
  bool degrade_checked = false;  // preserved <= clean + recovery
  bool degrade_ok = false;
  bool monotone_ok = false;  // noisy <= preserved (more premises never hurt)
  bool loss_only_checked = false;  // no spurious: noisy >= clean
  bool loss_only_ok = false;
  std::optional<double> inflation;  // noisy / clean when both finite, clean >= 1
};

PerturbationReport perturbation_report(const Formula& q,
                                       const PremiseBase& clean,
                                       const NoiseSpec& spec,
                                       const ProofSystem& system,
                                       const SymbolTable& table);

// Bits to rewrite the clean base into the observed one: two gamma-coded
// counts plus one index per changed member into the combined universe.
size_t base_conversion_bits(const PremiseBase& clean, const NoiseSpec& spec);

// Suite constants in the no-worse allowance
//   opt_noisy <= opt_clean + C1 * rho * conversion_bits / f + C2 * recovery.
constexpr double kNoWorseC1 = 4.0;
constexpr double kNoWorseC2 = 4.0;

struct NoisyTradeoff {
  size_t m = 0;
  size_t m_tilde = 0;
  Depth recovery_depth;
  size_t conversion_bits = 0;
  AmortizedCosts noisy_costs;
  CriticalFrequency noisy_fc;
  std::optional<AmortizedCosts> clean_costs;
  bool no_worse_checked = false;
  bool no_worse_ok = false;
  double clean_opt = 0.0;
  double noisy_opt = 0.0;
  double allowance = 0.0;
};

// Cache-versus-derive analysis against the observed base, with the clean
// base alongside and the allowance check tying the two optima together.
NoisyTradeoff noisy_tradeoff(const Formula& q, const KnowledgeBase& kb,
                             const NoiseSpec& spec, double frequency,
                             const CostModel& model,
                             const SearchLimits& limits = {});

struct RobustTerm {
  uint32_t item = 0;
  size_t support_size = 0;
  size_t polluted = 0;
  double exposure = 0.0;  // polluted / max(1, support_size)
};

// Penalized saving over the observed base:
//   value = delta(S) - lambda * sum_{u in S} cost(u) * exposure(u),
// where exposure measures how much of u's support is spurious.
struct RobustObjective {
  double lambda = 0.0;
  double delta = 0.0;
  double penalty = 0.0;
  double value = 0.0;
  std::vector<RobustTerm> terms;  // one per selected item
};

RobustObjective robust_objective(const KnowledgeBase& kb,
                                 const Workload& workload,
                                 const NoiseSpec& spec,
                                 const CandidateSet& candidates,
                                 const std::vector<uint32_t>& selection,
                                 double lambda,
                                 const SearchLimits& limits = {});

// Repair-then-allocate: phase 1 re-derives the recoverable critical lost
// premises (those inside some query's support) at index cost; phase 2 spends
// the remaining budget on cache candidates by density greedy; the result is
// checked against a worst-case depth bound.
struct TwoPhaseResult {
  std::vector<Formula> critical;       // lost premises some query relies on
  std::vector<Formula> recoverable;    // critical and re-derivable
  std::vector<Formula> irrecoverable;  // critical and gone for good
  unsigned index_bits = 0;             // per-premise compensation cost
  double budget = 0.0;
  double comp_cost = 0.0;
  double phase2_budget = 0.0;
  std::vector<uint32_t> rejected;   // candidates outside the repaired closure
  std::vector<uint32_t> selection;  // phase-2 picks, original candidate ids
  double delta_add = 0.0;
  Depth max_depth;                      // worst query depth after both phases
  int64_t sla_depth = 0;
  std::vector<size_t> unreachable_queries;
  bool feasible = false;
  std::string reason;  // empty when feasible
  DrReport dr;
};

TwoPhaseResult two_phase_allocate(const KnowledgeBase& kb,
                                  const Workload& workload,
                                  const NoiseSpec& spec,
                                  const CandidateSet& candidates,
                                  int64_t sla_depth, double budget,
                                  size_t seed_size = 3,
                                  uint64_t dr_samples = 32,
                                  uint64_t dr_seed = 7,
                                  const SearchLimits& limits = {});

}  // namespace kbdepth

#endif  // KBDEPTH_NOISE_HPP_
