#ifndef KBDEPTH_CLOSURE_HPP_
#define KBDEPTH_CLOSURE_HPP_

#include <unordered_set>
#include <vector>

#include "kbdepth/kb.hpp"

namespace kbdepth {

// Constant universe relevant to derivations from `base` under `system`,
// optionally extended by the constants of a query formula.  Range
// restriction makes the closure invariant under enlarging this set.
std::vector<std::string> gather_constants(const PremiseBase& base,
                                          const ProofSystem& system,
                                          const Formula* query = nullptr);

// Derivable ground atoms: semi-naive fixpoint over the ground rule instances,
// seeded with the atom members of the base.
class AtomClosure {
 public:
  AtomClosure(const PremiseBase& base, const ProofSystem& system,
              const std::vector<std::string>& constants);

  bool contains(const GroundAtom& a) const { return derivable_.count(a) != 0; }
  const std::unordered_set<GroundAtom, AtomHash>& atoms() const {
    return derivable_;
  }

 private:
  std::unordered_set<GroundAtom, AtomHash> derivable_;
};

// Membership of f in the deductive closure of `base`.  A conjunction is
// entailed when some left prefix is a base member (or is empty) and every
// remaining conjunct is a derivable atom.
bool entails(const PremiseBase& base, const ProofSystem& system, const Formula& f);

struct CoreResult {
  PremiseBase core;                 // irredundant premises, canonical order
  std::vector<Formula> shortcuts;   // removed members, canonical order
};

// Irredundant core of the operational base: scan in canonical order and drop
// any member entailed by the remaining ones.  Depends only on the premise
// set, the rules, and the constant universe.
CoreResult atom_core(const KnowledgeBase& kb);
CoreResult atom_core(const PremiseBase& base, const ProofSystem& system,
                     const SymbolTable& table,
                     const std::vector<std::string>& constants);

}  // namespace kbdepth

#endif  // KBDEPTH_CLOSURE_HPP_
