#ifndef KBDEPTH_FORMULA_HPP_
#define KBDEPTH_FORMULA_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace kbdepth {

// Upper bound on conjuncts per formula; conj-intro conclusions beyond this
// are rejected as structurally invalid.
inline constexpr size_t kMaxConjuncts = 4096;

// Identifier rules: nonempty ASCII, lowercase first character for predicate
// and constant symbols, uppercase first character for rule variables.
bool is_constant_name(const std::string& s);
bool is_variable_name(const std::string& s);

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  bool operator==(const GroundAtom& o) const {
    return predicate == o.predicate && args == o.args;
  }
  // Lexicographic on (predicate, args); used for deterministic internal ids.
  bool operator<(const GroundAtom& o) const {
    if (predicate != o.predicate) return predicate < o.predicate;
    return args < o.args;
  }

  std::string to_string() const;  // p(a,b) or bare p for arity 0
};

// Validates identifiers and arity; throws Errc::kInvalidArgument.
GroundAtom make_atom(std::string predicate, std::vector<std::string> args);

// Ground conjunction in left-associated normal form: the conjunct list
// (a1,...,at) denotes (...((a1 & a2) & a3)... & at).  t >= 1; a single
// conjunct is a plain atom.
class Formula {
 public:
  explicit Formula(GroundAtom atom) : conjuncts_{std::move(atom)} {}
  explicit Formula(std::vector<GroundAtom> conjuncts);

  size_t width() const { return conjuncts_.size(); }
  bool is_atom() const { return conjuncts_.size() == 1; }
  const std::vector<GroundAtom>& conjuncts() const { return conjuncts_; }
  const GroundAtom& atom() const { return conjuncts_.front(); }
  const GroundAtom& last() const { return conjuncts_.back(); }

  // Left prefix of the first t conjuncts (1 <= t <= width()).
  Formula prefix(size_t t) const;

  // Appends one conjunct on the right, i.e. one conjunction introduction.
  Formula extended(const GroundAtom& a) const;

  bool operator==(const Formula& o) const { return conjuncts_ == o.conjuncts_; }
  bool operator!=(const Formula& o) const { return !(*this == o); }
  bool operator<(const Formula& o) const { return conjuncts_ < o.conjuncts_; }

  std::string to_string() const;  // "p(a) & q(b)"

 private:
  std::vector<GroundAtom> conjuncts_;
};

struct AtomHash {
  size_t operator()(const GroundAtom& a) const;
};

struct FormulaHash {
  size_t operator()(const Formula& f) const;
};

}  // namespace kbdepth

#endif  // KBDEPTH_FORMULA_HPP_
