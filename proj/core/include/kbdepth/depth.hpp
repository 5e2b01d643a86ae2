#ifndef KBDEPTH_DEPTH_HPP_
#define KBDEPTH_DEPTH_HPP_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbdepth/closure.hpp"
#include "kbdepth/kb.hpp"

namespace kbdepth {

// Derivation depth value: a finite count or the Unreachable sentinel.
// Unreachable never participates in arithmetic; compare or report only.
class Depth {
 public:
  Depth() = default;  // default-constructed value is the Unreachable sentinel
  static Depth unreachable() { return Depth(); }
  static Depth finite(int64_t v) {
    Depth d;
    d.finite_ = true;
    d.value_ = v;
    return d;
  }

  bool is_unreachable() const { return !finite_; }
  bool is_finite() const { return finite_; }
  int64_t value() const;  // throws on Unreachable

  // Total order with Unreachable above every finite value.
  bool operator<(const Depth& o) const {
    if (finite_ != o.finite_) return finite_;
    return finite_ && value_ < o.value_;
  }
  bool operator==(const Depth& o) const {
    return finite_ == o.finite_ && (!finite_ || value_ == o.value_);
  }
  bool operator<=(const Depth& o) const { return *this < o || *this == o; }

  std::string to_string() const;

 private:
  bool finite_ = false;
  int64_t value_ = 0;
};

// Ground rule instances over a fixed constant universe with dense atom ids;
// built once, then evaluated against many premise bases.
struct DepthContext {
  SymbolTable table;
  std::vector<GroundAtom> atoms;  // dense id -> atom, sorted
  std::unordered_map<GroundAtom, int, AtomHash> ids;

  struct Inst {
    int rule_id;
    int head;
    std::vector<int> body;         // in rule body order, may repeat
    std::vector<int> body_unique;  // deduplicated, for counting
  };
  std::vector<Inst> instances;
  std::vector<std::vector<int>> consumers;  // atom id -> instances using it

  static DepthContext build(const ProofSystem& system,
                            const std::vector<std::string>& constants,
                            const std::vector<GroundAtom>& seed_atoms);

  int id_of(const GroundAtom& a) const;  // -1 when absent
};

// Shortest derivation height per atom: priority-queue relaxation where an
// instance's head cost is 1 + max over its body atoms.  Base atoms sit at 0.
std::vector<Depth> compute_atom_depths(const DepthContext& ctx,
                                       const PremiseBase& base);

// One witness entry: how `derived` is obtained from earlier formulas.
// rule_id 0 marks conjunction introduction with premises {prefix, last atom};
// otherwise premises are the instance body atoms in order.
struct WitnessStep {
  Formula derived;
  int rule_id;
  std::vector<Formula> premises;
};

struct DepthResult {
  Depth depth;
  std::vector<WitnessStep> witness;  // bottom-up replayable order
};

// Depth of q relative to the base, with a deterministic witness.  Ties among
// depth-minimal rule instances break on (rule id, canonical body order).
DepthResult derivation_depth(const Formula& q, const PremiseBase& base,
                             const ProofSystem& system);

// Immediate predecessors of a derived formula: the conjunction split, or the
// body of the depth-minimal rule instance under the same tie-breaking.
// Throws Errc::kUndefinedPredecessor for base members and non-members of Cn.
std::vector<Formula> predecessors(const Formula& s, const PremiseBase& base,
                                  const ProofSystem& system);

struct DepthProfile {
  Depth n_int;     // from the irredundant core
  Depth n_op;      // from the operational base
  Depth n_cached;  // from the operational base plus cache entries
};

// Requires q in Cn; throws Errc::kUnreachableQuery otherwise.
DepthProfile depth_profile(const KnowledgeBase& kb, const Formula& q,
                           const std::vector<Formula>& cache);

// Repeated depth queries against varying bases over one grounded context.
// Atom depth vectors are cached per base digest.
class DepthOracle {
 public:
  DepthOracle(const ProofSystem& system, std::vector<std::string> constants,
              std::vector<GroundAtom> seed_atoms);

  Depth depth(const Formula& q, const PremiseBase& base);
  const DepthContext& context() const { return ctx_; }
  const SymbolTable& table() const { return ctx_.table; }

 private:
  const std::vector<Depth>& atom_depths(const PremiseBase& base);

  ProofSystem system_;
  DepthContext ctx_;
  std::unordered_map<uint64_t, std::vector<Depth>> cache_;
};

// Depth of a conjunction given per-atom depths: zero for base members, else
// one past the max of the left prefix and the last conjunct.
Depth formula_depth(const DepthContext& ctx, const PremiseBase& base,
                    const Formula& q, const std::vector<Depth>& atom_depths);

}  // namespace kbdepth

#endif  // KBDEPTH_DEPTH_HPP_
