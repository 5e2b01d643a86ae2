#ifndef KBDEPTH_RULES_HPP_
#define KBDEPTH_RULES_HPP_

#include <optional>
#include <string>
#include <vector>

#include "kbdepth/formula.hpp"

namespace kbdepth {

// Built-in conjunction introduction: from a formula and an atom, conclude
// the formula extended by that atom on the right.  Always rule id 0.
inline constexpr int kConjIntroId = 0;
inline constexpr int kConjIntroArity = 2;

// Default cap on rule body length.
inline constexpr size_t kDefaultMaxBody = 8;

struct Term {
  bool is_var = false;
  std::string text;

  bool operator==(const Term& o) const {
    return is_var == o.is_var && text == o.text;
  }
};

struct AtomPattern {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const AtomPattern& o) const {
    return predicate == o.predicate && args == o.args;
  }
  bool is_ground() const;
  std::string to_string() const;
};

// Horn rule over atom patterns.  Range-restricted: every head variable
// occurs in the body.  User rules carry ids 1..n; id 0 is conj-intro.
struct Rule {
  int id = 0;
  AtomPattern head;
  std::vector<AtomPattern> body;

  std::string to_string() const;  // "head :- b1, ..., bj"
  bool same_shape(const Rule& o) const {
    return head == o.head && body == o.body;
  }
};

struct RuleInstance {
  int rule_id = 0;
  GroundAtom head;
  std::vector<GroundAtom> body;
};

struct ProofSystem {
  std::vector<Rule> rules;  // user rules in id order (ids 1..size)

  // Rule count including conj-intro; sets the fixed width of encoded rule ids.
  size_t rule_count() const { return rules.size() + 1; }

  // Max premise arity over all rules (conj-intro included, so >= 2).
  size_t max_arity() const;

  const Rule& by_id(int id) const;  // user rules only; throws on 0 or unknown
};

// Matches `pattern` against a ground atom, extending the substitution.
// Returns false (and may leave partial bindings) when they do not unify.
bool match_atom(const AtomPattern& pattern, const GroundAtom& ground,
                std::vector<std::pair<std::string, std::string>>& subst);

GroundAtom substitute(const AtomPattern& pattern,
                      const std::vector<std::pair<std::string, std::string>>& subst);

// All ground instances of the user rules over the given constants,
// enumerated deterministically (rule id major, substitution lexicographic).
std::vector<RuleInstance> ground_rules(const ProofSystem& system,
                                       const std::vector<std::string>& constants);

}  // namespace kbdepth

#endif  // KBDEPTH_RULES_HPP_
