#include "kbdepth/kb.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"

namespace kbdepth {

namespace {

uint64_t digest_bits(uint64_t h, const BitString& bits) {
  for (uint8_t b : bits.bytes()) {
    h ^= b;
    h *= 1099511628211ull;
  }
  h ^= bits.size();
  h *= 1099511628211ull;
  return h;
}

}  // namespace

PremiseBase PremiseBase::build(std::vector<Formula> formulas,
                               const SymbolTable& table) {
  PremiseBase out;
  std::vector<std::pair<BitString, Formula>> keyed;
  keyed.reserve(formulas.size());
  for (auto& f : formulas) {
    if (out.members_.insert(f).second)
      keyed.emplace_back(canonical_encode(f, table), std::move(f));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return BitString::compare(a.first, b.first) < 0;
  });
  uint64_t h = 1469598103934665603ull;
  out.ordered_.reserve(keyed.size());
  for (auto& [bits, f] : keyed) {
    h = digest_bits(h, bits);
    out.ordered_.push_back(std::move(f));
  }
  out.digest_ = h;
  return out;
}

std::vector<GroundAtom> PremiseBase::atom_members() const {
  std::vector<GroundAtom> out;
  for (const auto& f : ordered_)
    if (f.is_atom()) out.push_back(f.atom());
  return out;
}

PremiseBase PremiseBase::without(const Formula& f, const SymbolTable& table) const {
  std::vector<Formula> rest;
  rest.reserve(ordered_.size());
  for (const auto& g : ordered_)
    if (g != f) rest.push_back(g);
  return build(std::move(rest), table);
}

PremiseBase PremiseBase::with(const std::vector<Formula>& extra,
                              const SymbolTable& table) const {
  std::vector<Formula> all = ordered_;
  all.insert(all.end(), extra.begin(), extra.end());
  return build(std::move(all), table);
}

KnowledgeBase::KnowledgeBase(std::vector<GroundAtom> facts,
                             std::vector<Formula> stored, ProofSystem system)
    : system_(std::move(system)) {
  // Collapse duplicates while keeping first-seen order for reporting.
  std::set<GroundAtom> seen_facts;
  for (auto& a : facts)
    if (seen_facts.insert(a).second) facts_.push_back(std::move(a));
  std::unordered_set<Formula, FormulaHash> seen_stored;
  for (auto& f : stored)
    if (seen_stored.insert(f).second) stored_.push_back(std::move(f));

  std::vector<std::string> syms;
  std::set<std::string> consts;
  auto visit_atom = [&](const GroundAtom& a) {
    syms.push_back(a.predicate);
    for (const auto& arg : a.args) {
      syms.push_back(arg);
      consts.insert(arg);
    }
  };
  for (const auto& a : facts_) visit_atom(a);
  for (const auto& f : stored_)
    for (const auto& a : f.conjuncts()) visit_atom(a);
  for (const auto& r : system_.rules) {
    auto visit_pattern = [&](const AtomPattern& p) {
      syms.push_back(p.predicate);
      for (const Term& t : p.args) {
        if (!t.is_var) {
          syms.push_back(t.text);
          consts.insert(t.text);
        }
      }
    };
    visit_pattern(r.head);
    for (const auto& b : r.body) visit_pattern(b);
  }
  symbols_ = SymbolTable(std::move(syms));
  constants_.assign(consts.begin(), consts.end());

  std::vector<Formula> so;
  for (const auto& a : facts_) so.push_back(Formula(a));
  for (const auto& f : stored_) so.push_back(f);
  s_o_ = PremiseBase::build(std::move(so), symbols_);
}

std::vector<GroundAtom> KnowledgeBase::herbrand_atoms() const {
  // Observed predicate signatures (name, arity), including rule-only ones.
  std::set<std::pair<std::string, size_t>> sig;
  for (const auto& a : facts_) sig.emplace(a.predicate, a.args.size());
  for (const auto& f : stored_)
    for (const auto& a : f.conjuncts()) sig.emplace(a.predicate, a.args.size());
  for (const auto& r : system_.rules) {
    sig.emplace(r.head.predicate, r.head.args.size());
    for (const auto& b : r.body) sig.emplace(b.predicate, b.args.size());
  }

  std::vector<GroundAtom> out;
  for (const auto& [pred, arity] : sig) {
    if (arity == 0) {
      out.push_back(GroundAtom{pred, {}});
      continue;
    }
    if (constants_.empty()) continue;
    std::vector<size_t> pick(arity, 0);
    bool done = false;
    while (!done) {
      GroundAtom a{pred, {}};
      a.args.reserve(arity);
      for (size_t i = 0; i < arity; ++i) a.args.push_back(constants_[pick[i]]);
      out.push_back(std::move(a));
      done = true;
      for (size_t i = arity; i-- > 0;) {
        if (++pick[i] < constants_.size()) {
          done = false;
          break;
        }
        pick[i] = 0;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kbdepth
