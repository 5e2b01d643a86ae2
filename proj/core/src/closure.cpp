#include "kbdepth/closure.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "kbdepth/errors.hpp"

namespace kbdepth {

std::vector<std::string> gather_constants(const PremiseBase& base,
                                          const ProofSystem& system,
                                          const Formula* query) {
  std::set<std::string> consts;
  for (const auto& f : base.ordered())
    for (const auto& a : f.conjuncts())
      for (const auto& arg : a.args) consts.insert(arg);
  for (const auto& r : system.rules) {
    auto visit = [&](const AtomPattern& p) {
      for (const Term& t : p.args)
        if (!t.is_var) consts.insert(t.text);
    };
    visit(r.head);
    for (const auto& b : r.body) visit(b);
  }
  if (query != nullptr) {
    for (const auto& a : query->conjuncts())
      for (const auto& arg : a.args) consts.insert(arg);
  }
  return {consts.begin(), consts.end()};
}

AtomClosure::AtomClosure(const PremiseBase& base, const ProofSystem& system,
                         const std::vector<std::string>& constants) {
  std::vector<RuleInstance> instances = ground_rules(system, constants);

  std::vector<GroundAtom> frontier;
  for (const auto& f : base.ordered()) {
    if (f.is_atom() && derivable_.insert(f.atom()).second)
      frontier.push_back(f.atom());
  }

  // Semi-naive propagation: an instance fires once its last missing body
  // atom is derived; duplicate body atoms count once.
  std::unordered_map<GroundAtom, std::vector<size_t>, AtomHash> by_body;
  std::vector<size_t> missing(instances.size(), 0);
  for (size_t i = 0; i < instances.size(); ++i) {
    std::set<GroundAtom> uniq(instances[i].body.begin(), instances[i].body.end());
    missing[i] = uniq.size();
    for (const auto& a : uniq) by_body[a].push_back(i);
  }

  while (!frontier.empty()) {
    GroundAtom a = std::move(frontier.back());
    frontier.pop_back();
    auto it = by_body.find(a);
    if (it == by_body.end()) continue;
    for (size_t idx : it->second) {
      if (missing[idx] == 0) continue;
      if (--missing[idx] == 0) {
        const GroundAtom& head = instances[idx].head;
        if (derivable_.insert(head).second) frontier.push_back(head);
      }
    }
  }
}

namespace {

// f is entailed when f itself is a base member, or some split point j leaves
// a left prefix that is a base member (j >= 1) or empty (j == 0) with every
// conjunct to its right a derivable atom.
bool entailed_under(const PremiseBase& base, const AtomClosure& closure,
                    const Formula& f) {
  if (base.contains(f)) return true;
  const auto& c = f.conjuncts();
  bool suffix_ok = true;
  for (size_t j = c.size(); j-- > 0;) {
    suffix_ok = suffix_ok && closure.contains(c[j]);
    if (!suffix_ok) return false;
    if (j == 0) return true;
    if (base.contains(f.prefix(j))) return true;
  }
  return false;
}

}  // namespace

bool entails(const PremiseBase& base, const ProofSystem& system, const Formula& f) {
  if (base.contains(f)) return true;
  AtomClosure closure(base, system, gather_constants(base, system, &f));
  return entailed_under(base, closure, f);
}

CoreResult atom_core(const PremiseBase& base, const ProofSystem& system,
                     const SymbolTable& table,
                     const std::vector<std::string>& constants) {
  std::vector<Formula> current = base.ordered();
  std::vector<Formula> shortcuts;
  for (const Formula& s : base.ordered()) {
    std::vector<Formula> rest;
    rest.reserve(current.size());
    for (const auto& g : current)
      if (g != s) rest.push_back(g);
    PremiseBase rest_base = PremiseBase::build(std::move(rest), table);
    AtomClosure closure(rest_base, system, constants);
    if (entailed_under(rest_base, closure, s)) {
      shortcuts.push_back(s);
      current = rest_base.ordered();
    }
  }
  CoreResult out;
  out.core = PremiseBase::build(std::move(current), table);
  out.shortcuts = std::move(shortcuts);
  return out;
}

CoreResult atom_core(const KnowledgeBase& kb) {
  return atom_core(kb.operational_base(), kb.system(), kb.symbols(),
                   kb.constants());
}

}  // namespace kbdepth
