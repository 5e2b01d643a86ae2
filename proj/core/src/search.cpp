#include "kbdepth/search.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"

namespace kbdepth {

namespace {

// Premise reference: a base position or a candidate (derivable formula) id.
struct Ref {
  bool from_base;
  uint32_t index;
  bool operator<(const Ref& o) const {
    if (from_base != o.from_base) return from_base;
    return index < o.index;
  }
  bool operator==(const Ref& o) const {
    return from_base == o.from_base && index == o.index;
  }
};

struct Just {
  int rule_id;
  std::vector<Ref> premises;  // in pointer order
};

// Backward cone of q: every formula a minimal derivation set could contain,
// with its one-step justifications over base-or-cone premises.
struct SearchSpace {
  std::vector<Formula> cands;  // canonical order, dense ids
  std::unordered_map<Formula, uint32_t, FormulaHash> cand_id;
  std::vector<std::vector<Just>> justs;
  std::unordered_map<Formula, uint32_t, FormulaHash> base_pos;
  int q_id = -1;  // -1 when q is a base member
};

SearchSpace build_space(const Formula& q, const PremiseBase& base,
                        const ProofSystem& system) {
  SearchSpace space;
  for (uint32_t i = 0; i < base.size(); ++i) space.base_pos.emplace(base.at(i), i);
  if (base.contains(q)) return space;

  std::vector<std::string> constants = gather_constants(base, system, &q);
  AtomClosure closure(base, system, constants);
  std::vector<RuleInstance> instances = ground_rules(system, constants);
  std::unordered_map<GroundAtom, std::vector<size_t>, AtomHash> by_head;
  for (size_t i = 0; i < instances.size(); ++i)
    by_head[instances[i].head].push_back(i);

  auto derivable_atom = [&](const GroundAtom& a) { return closure.contains(a); };

  // Collect cone formulas by backward walking; only derivable ones enter.
  std::vector<Formula> pending{q};
  std::unordered_set<Formula, FormulaHash> seen{q};
  std::vector<Formula> cone;
  while (!pending.empty()) {
    Formula f = std::move(pending.back());
    pending.pop_back();
    cone.push_back(f);
    auto visit = [&](const Formula& p) {
      if (base.contains(p) || seen.count(p)) return;
      seen.insert(p);
      pending.push_back(p);
    };
    if (!f.is_atom()) {
      visit(f.prefix(f.width() - 1));
      visit(Formula(f.last()));
    } else {
      auto it = by_head.find(f.atom());
      if (it == by_head.end()) continue;
      for (size_t idx : it->second) {
        const auto& inst = instances[idx];
        bool usable = std::all_of(inst.body.begin(), inst.body.end(),
                                  derivable_atom);
        if (!usable) continue;
        for (const auto& b : inst.body) visit(Formula(b));
      }
    }
  }

  // Canonical candidate order via encodings over a local table.
  std::vector<GroundAtom> table_atoms;
  for (const auto& f : cone)
    for (const auto& a : f.conjuncts()) table_atoms.push_back(a);
  for (const auto& f : base.ordered())
    for (const auto& a : f.conjuncts()) table_atoms.push_back(a);
  SymbolTable table = SymbolTable::from_atoms(table_atoms);
  std::sort(cone.begin(), cone.end(), [&](const Formula& a, const Formula& b) {
    return canonical_less(a, b, table);
  });

  space.cands = std::move(cone);
  for (uint32_t i = 0; i < space.cands.size(); ++i)
    space.cand_id.emplace(space.cands[i], i);
  space.q_id = static_cast<int>(space.cand_id.at(q));

  auto ref_of = [&](const Formula& f) -> Ref {
    auto bit = space.base_pos.find(f);
    if (bit != space.base_pos.end()) return Ref{true, bit->second};
    return Ref{false, space.cand_id.at(f)};
  };

  space.justs.resize(space.cands.size());
  for (uint32_t c = 0; c < space.cands.size(); ++c) {
    const Formula& f = space.cands[c];
    if (!f.is_atom()) {
      Just j{kConjIntroId, {ref_of(f.prefix(f.width() - 1)), ref_of(Formula(f.last()))}};
      space.justs[c].push_back(std::move(j));
      continue;
    }
    auto it = by_head.find(f.atom());
    if (it == by_head.end()) continue;
    for (size_t idx : it->second) {
      const auto& inst = instances[idx];
      if (!std::all_of(inst.body.begin(), inst.body.end(), derivable_atom))
        continue;
      Just j{inst.rule_id, {}};
      j.premises.reserve(inst.body.size());
      for (const auto& b : inst.body) j.premises.push_back(ref_of(Formula(b)));
      space.justs[c].push_back(std::move(j));
    }
    std::sort(space.justs[c].begin(), space.justs[c].end(),
              [](const Just& a, const Just& b) {
                if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
                return a.premises < b.premises;
              });
  }
  return space;
}

using State = std::vector<uint32_t>;  // sorted candidate ids

struct StateHash {
  size_t operator()(const State& s) const {
    uint64_t h = 1469598103934665603ull;
    for (uint32_t v : s) {
      h ^= v + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

bool just_ready(const Just& j, const std::vector<char>& have) {
  for (const Ref& r : j.premises)
    if (!r.from_base && !have[r.index]) return false;
  return true;
}

// Deterministic linearization of a derivation set into a pool trace.
DerivationTrace peel_trace(const SearchSpace& space, const PremiseBase& base,
                           const State& set, const Formula& q) {
  DerivationTrace trace;
  trace.base_size = static_cast<uint32_t>(base.size());
  std::vector<char> have(space.cands.size(), 0);
  std::vector<uint32_t> pool_pos(space.cands.size(), 0);
  std::vector<uint32_t> remaining = set;

  while (!remaining.empty()) {
    bool progressed = false;
    for (size_t i = 0; i < remaining.size(); ++i) {
      uint32_t c = remaining[i];
      const Just* pick = nullptr;
      for (const Just& j : space.justs[c]) {
        if (just_ready(j, have)) {
          pick = &j;
          break;
        }
      }
      if (pick == nullptr) continue;
      TraceStep step;
      step.rule_id = pick->rule_id;
      for (const Ref& r : pick->premises)
        step.pointers.push_back(r.from_base ? r.index : pool_pos[r.index]);
      trace.steps.push_back(std::move(step));
      have[c] = 1;
      pool_pos[c] =
          static_cast<uint32_t>(base.size() + trace.steps.size() - 1);
      remaining.erase(remaining.begin() + static_cast<long>(i));
      progressed = true;
      break;
    }
    if (!progressed)
      throw Error(Errc::kInvalidArgument, "derivation set is not serializable");
  }
  auto bit = space.base_pos.find(q);
  trace.output_pointer = bit != space.base_pos.end()
                             ? bit->second
                             : pool_pos[space.cand_id.at(q)];
  return trace;
}

struct BfsOutcome {
  bool found = false;
  bool budget_hit = false;
  uint64_t level = 0;
  std::vector<State> goals;  // all minimal derivation sets when complete
  State first_goal;
};

// Level-synchronous BFS over derivation sets.  With stop_at_first the search
// returns on the earliest goal; otherwise it completes the goal level to
// collect every minimal set.
BfsOutcome search_sets(const SearchSpace& space, const SearchLimits& limits,
                       bool stop_at_first) {
  BfsOutcome out;
  if (space.q_id < 0) {  // q in base: the empty trace wins
    out.found = true;
    out.level = 0;
    out.goals.push_back({});
    out.first_goal = {};
    return out;
  }
  const uint32_t q = static_cast<uint32_t>(space.q_id);

  std::unordered_set<State, StateHash> visited;
  std::vector<State> frontier{State{}};
  visited.insert(State{});
  uint64_t generated = 0;

  while (!frontier.empty()) {
    std::vector<State> next;
    for (const State& s : frontier) {
      std::vector<char> have(space.cands.size(), 0);
      for (uint32_t v : s) have[v] = 1;
      for (uint32_t c = 0; c < space.cands.size(); ++c) {
        if (have[c]) continue;
        bool ready = false;
        for (const Just& j : space.justs[c]) {
          if (just_ready(j, have)) {
            ready = true;
            break;
          }
        }
        if (!ready) continue;
        if (++generated > limits.node_budget) {
          out.budget_hit = true;
          return out;
        }
        State ns = s;
        ns.insert(std::lower_bound(ns.begin(), ns.end(), c), c);
        if (!visited.insert(ns).second) continue;
        if (c == q || std::binary_search(ns.begin(), ns.end(), q)) {
          if (!out.found) {
            out.found = true;
            out.first_goal = ns;
            out.level = s.size() + 1;
          }
          out.goals.push_back(ns);
          if (stop_at_first) return out;
        }
        next.push_back(std::move(ns));
      }
    }
    if (out.found) return out;  // goal level fully expanded
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

ShortestTraceResult min_trace_length(const Formula& q, const PremiseBase& base,
                                     const ProofSystem& system,
                                     const SearchLimits& limits) {
  if (!entails(base, system, q))
    throw Error(Errc::kUnreachableQuery, "query is not derivable");

  SearchSpace space = build_space(q, base, system);
  BfsOutcome bfs = search_sets(space, limits, /*stop_at_first=*/true);

  ShortestTraceResult out;
  if (bfs.found) {
    out.length = bfs.level;
    out.exact = true;
    out.trace = peel_trace(space, base, bfs.first_goal, q);
    return out;
  }
  // Budget exhausted: fall back to the depth witness as a certified bound.
  DepthResult d = derivation_depth(q, base, system);
  out.length = d.witness.size();
  out.exact = false;
  out.trace = witness_to_trace(q, d, base);
  return out;
}

EssResult ess_plus(const Formula& q, const PremiseBase& base,
                   const ProofSystem& system, EssMode mode,
                   const SearchLimits& limits) {
  if (!entails(base, system, q))
    throw Error(Errc::kUnreachableQuery, "query is not derivable");

  SearchSpace space = build_space(q, base, system);
  std::set<Formula> atoms;
  EssResult out;

  if (space.q_id < 0) {  // q sits in the base; its shortest trace just points
    out.atoms.push_back(q);
    out.n = 0;
    out.n_exact = true;
    out.exact = true;
    return out;
  }

  bool want_exact = mode == EssMode::kExact;
  BfsOutcome bfs = search_sets(space, limits, /*stop_at_first=*/!want_exact);
  if (bfs.budget_hit) {
    // Degrade: atoms of the single witness trace, flagged approximate.
    DepthResult d = derivation_depth(q, base, system);
    DerivationTrace trace = witness_to_trace(q, d, base);
    for (const auto& step : trace.steps)
      for (uint32_t p : step.pointers)
        if (p < base.size()) atoms.insert(base.at(p));
    out.atoms.assign(atoms.begin(), atoms.end());
    out.n = trace.steps.size();
    out.n_exact = false;
    out.exact = false;
    return out;
  }

  out.n = bfs.level;
  out.n_exact = true;

  if (!want_exact) {
    DerivationTrace trace = peel_trace(space, base, bfs.first_goal, q);
    for (const auto& step : trace.steps)
      for (uint32_t p : step.pointers)
        if (p < base.size()) atoms.insert(base.at(p));
    out.atoms.assign(atoms.begin(), atoms.end());
    out.exact = false;
    return out;
  }

  // Exact union: every minimal derivation set, every acyclic justification
  // assignment, subject to the combination cap.
  uint64_t combos = 0;
  bool capped = false;
  for (const State& goal : bfs.goals) {
    std::vector<char> in_set(space.cands.size(), 0);
    std::vector<uint32_t> local(goal.begin(), goal.end());
    for (uint32_t v : local) in_set[v] = 1;

    // Justifications usable inside this set (premises in base or the set).
    std::vector<std::vector<const Just*>> usable(local.size());
    bool viable = true;
    for (size_t i = 0; i < local.size(); ++i) {
      for (const Just& j : space.justs[local[i]]) {
        bool ok = true;
        for (const Ref& r : j.premises) {
          if (!r.from_base && (!in_set[r.index] || r.index == local[i]))
            ok = false;
        }
        if (ok) usable[i].push_back(&j);
      }
      if (usable[i].empty()) viable = false;
    }
    if (!viable) continue;

    std::vector<size_t> choice(local.size(), 0);
    std::unordered_map<uint32_t, size_t> pos_of;
    for (size_t i = 0; i < local.size(); ++i) pos_of[local[i]] = i;

    bool done = false;
    while (!done) {
      if (++combos > limits.tie_cap) {
        capped = true;
        break;
      }
      // Acyclicity of the chosen justification graph via Kahn peeling.
      std::vector<int> indeg(local.size(), 0);
      std::vector<std::vector<size_t>> consumers(local.size());
      for (size_t i = 0; i < local.size(); ++i) {
        for (const Ref& r : usable[i][choice[i]]->premises) {
          if (r.from_base) continue;
          size_t dep = pos_of.at(r.index);
          ++indeg[i];
          consumers[dep].push_back(i);
        }
      }
      std::vector<size_t> order;
      for (size_t i = 0; i < local.size(); ++i)
        if (indeg[i] == 0) order.push_back(i);
      for (size_t head = 0; head < order.size(); ++head) {
        for (size_t nxt : consumers[order[head]])
          if (--indeg[nxt] == 0) order.push_back(nxt);
      }
      if (order.size() == local.size()) {
        for (size_t i = 0; i < local.size(); ++i)
          for (const Ref& r : usable[i][choice[i]]->premises)
            if (r.from_base) atoms.insert(base.at(r.index));
      }
      // Next assignment.
      done = true;
      for (size_t i = local.size(); i-- > 0;) {
        if (++choice[i] < usable[i].size()) {
          done = false;
          break;
        }
        choice[i] = 0;
      }
    }
    if (capped) break;
  }

  out.atoms.assign(atoms.begin(), atoms.end());
  out.exact = !capped;
  return out;
}

}  // namespace kbdepth
