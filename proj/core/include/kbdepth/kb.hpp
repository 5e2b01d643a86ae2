#ifndef KBDEPTH_KB_HPP_
#define KBDEPTH_KB_HPP_

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "kbdepth/formula.hpp"
#include "kbdepth/rules.hpp"
#include "kbdepth/symbols.hpp"

namespace kbdepth {

// Deduplicated formula set with a canonical iteration order (lexicographic on
// canonical encodings).  Immutable after construction; the digest gives a
// stable identity for caching.
class PremiseBase {
 public:
  PremiseBase() = default;
  static PremiseBase build(std::vector<Formula> formulas, const SymbolTable& table);

  bool contains(const Formula& f) const { return members_.count(f) != 0; }
  size_t size() const { return ordered_.size(); }
  bool empty() const { return ordered_.empty(); }
  const std::vector<Formula>& ordered() const { return ordered_; }
  const Formula& at(size_t i) const { return ordered_.at(i); }
  uint64_t digest() const { return digest_; }

  // Atom members only (width-1 formulas), in canonical order.
  std::vector<GroundAtom> atom_members() const;

  PremiseBase without(const Formula& f, const SymbolTable& table) const;
  PremiseBase with(const std::vector<Formula>& extra, const SymbolTable& table) const;

 private:
  std::vector<Formula> ordered_;
  std::unordered_set<Formula, FormulaHash> members_;
  uint64_t digest_ = 0;
};

// Parsed knowledge base: ground facts, Horn rules, stored formulas, plus the
// symbol table and constant universe they span.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::vector<GroundAtom> facts, std::vector<Formula> stored,
                ProofSystem system);

  const std::vector<GroundAtom>& facts() const { return facts_; }
  const std::vector<Formula>& stored() const { return stored_; }
  const ProofSystem& system() const { return system_; }
  const SymbolTable& symbols() const { return symbols_; }
  const std::vector<std::string>& constants() const { return constants_; }

  // Operational premise base: facts plus stored formulas, deduplicated.
  const PremiseBase& operational_base() const { return s_o_; }

  // Every ground atom over the observed predicate/arity signature and the
  // constant universe, in canonical order.
  std::vector<GroundAtom> herbrand_atoms() const;

 private:
  std::vector<GroundAtom> facts_;
  std::vector<Formula> stored_;
  ProofSystem system_;
  SymbolTable symbols_;
  std::vector<std::string> constants_;
  PremiseBase s_o_;
};

}  // namespace kbdepth

#endif  // KBDEPTH_KB_HPP_
