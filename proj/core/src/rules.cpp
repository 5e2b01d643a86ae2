#include "kbdepth/rules.hpp"

#include <algorithm>

#include "kbdepth/errors.hpp"

namespace kbdepth {

bool AtomPattern::is_ground() const {
  return std::none_of(args.begin(), args.end(),
                      [](const Term& t) { return t.is_var; });
}

std::string AtomPattern::to_string() const {
  if (args.empty()) return predicate;
  std::string out = predicate;
  out.push_back('(');
  for (size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += args[i].text;
  }
  out.push_back(')');
  return out;
}

std::string Rule::to_string() const {
  std::string out = head.to_string() + " :- ";
  for (size_t i = 0; i < body.size(); ++i) {
    if (i > 0) out += ", ";
    out += body[i].to_string();
  }
  return out;
}

size_t ProofSystem::max_arity() const {
  size_t k = kConjIntroArity;
  for (const auto& r : rules) k = std::max(k, r.body.size());
  return k;
}

const Rule& ProofSystem::by_id(int id) const {
  if (id < 1 || static_cast<size_t>(id) > rules.size())
    throw Error(Errc::kInvalidArgument, "unknown rule id");
  return rules[static_cast<size_t>(id) - 1];
}

bool match_atom(const AtomPattern& pattern, const GroundAtom& ground,
                std::vector<std::pair<std::string, std::string>>& subst) {
  if (pattern.predicate != ground.predicate) return false;
  if (pattern.args.size() != ground.args.size()) return false;
  for (size_t i = 0; i < pattern.args.size(); ++i) {
    const Term& t = pattern.args[i];
    const std::string& c = ground.args[i];
    if (!t.is_var) {
      if (t.text != c) return false;
      continue;
    }
    auto it = std::find_if(subst.begin(), subst.end(),
                           [&](const auto& p) { return p.first == t.text; });
    if (it == subst.end()) {
      subst.emplace_back(t.text, c);
    } else if (it->second != c) {
      return false;
    }
  }
  return true;
}

GroundAtom substitute(const AtomPattern& pattern,
                      const std::vector<std::pair<std::string, std::string>>& subst) {
  GroundAtom out;
  out.predicate = pattern.predicate;
  out.args.reserve(pattern.args.size());
  for (const Term& t : pattern.args) {
    if (!t.is_var) {
      out.args.push_back(t.text);
      continue;
    }
    auto it = std::find_if(subst.begin(), subst.end(),
                           [&](const auto& p) { return p.first == t.text; });
    if (it == subst.end())
      throw Error(Errc::kInvalidArgument, "unbound variable " + t.text);
    out.args.push_back(it->second);
  }
  return out;
}

namespace {

// Variables of a rule in order of first occurrence, body first (so every
// head variable of a range-restricted rule is already listed).
std::vector<std::string> rule_variables(const Rule& rule) {
  std::vector<std::string> vars;
  auto visit = [&](const AtomPattern& p) {
    for (const Term& t : p.args) {
      if (t.is_var && std::find(vars.begin(), vars.end(), t.text) == vars.end())
        vars.push_back(t.text);
    }
  };
  for (const auto& b : rule.body) visit(b);
  visit(rule.head);
  return vars;
}

}  // namespace

std::vector<RuleInstance> ground_rules(const ProofSystem& system,
                                       const std::vector<std::string>& constants) {
  std::vector<std::string> universe = constants;
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

  std::vector<RuleInstance> out;
  for (const Rule& rule : system.rules) {
    std::vector<std::string> vars = rule_variables(rule);
    if (!vars.empty() && universe.empty()) continue;

    // Odometer over variable assignments; lexicographic in universe order.
    std::vector<size_t> pick(vars.size(), 0);
    bool done = false;
    while (!done) {
      std::vector<std::pair<std::string, std::string>> subst;
      subst.reserve(vars.size());
      for (size_t i = 0; i < vars.size(); ++i)
        subst.emplace_back(vars[i], universe[pick[i]]);

      RuleInstance inst;
      inst.rule_id = rule.id;
      inst.head = substitute(rule.head, subst);
      inst.body.reserve(rule.body.size());
      for (const auto& b : rule.body) inst.body.push_back(substitute(b, subst));
      out.push_back(std::move(inst));

      done = true;
      for (size_t i = vars.size(); i-- > 0;) {
        if (++pick[i] < universe.size()) {
          done = false;
          break;
        }
        pick[i] = 0;
      }
    }
  }
  return out;
}

}  // namespace kbdepth
