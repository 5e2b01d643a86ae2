#include "kbdepth/depth.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"

namespace kbdepth {

int64_t Depth::value() const {
  if (!finite_)
    throw Error(Errc::kInvalidArgument, "Unreachable has no numeric value");
  return value_;
}

std::string Depth::to_string() const {
  return finite_ ? std::to_string(value_) : std::string("unreachable");
}

DepthContext DepthContext::build(const ProofSystem& system,
                                 const std::vector<std::string>& constants,
                                 const std::vector<GroundAtom>& seed_atoms) {
  DepthContext ctx;
  std::vector<RuleInstance> raw = ground_rules(system, constants);

  std::set<GroundAtom> universe(seed_atoms.begin(), seed_atoms.end());
  for (const auto& inst : raw) {
    universe.insert(inst.head);
    universe.insert(inst.body.begin(), inst.body.end());
  }
  ctx.atoms.assign(universe.begin(), universe.end());
  ctx.ids.reserve(ctx.atoms.size());
  for (int i = 0; i < static_cast<int>(ctx.atoms.size()); ++i)
    ctx.ids[ctx.atoms[i]] = i;

  std::vector<std::string> syms;
  for (const auto& a : ctx.atoms) {
    syms.push_back(a.predicate);
    for (const auto& arg : a.args) syms.push_back(arg);
  }
  ctx.table = SymbolTable(std::move(syms));

  ctx.consumers.resize(ctx.atoms.size());
  ctx.instances.reserve(raw.size());
  for (const auto& inst : raw) {
    Inst e;
    e.rule_id = inst.rule_id;
    e.head = ctx.ids.at(inst.head);
    for (const auto& b : inst.body) e.body.push_back(ctx.ids.at(b));
    e.body_unique = e.body;
    std::sort(e.body_unique.begin(), e.body_unique.end());
    e.body_unique.erase(std::unique(e.body_unique.begin(), e.body_unique.end()),
                        e.body_unique.end());
    int idx = static_cast<int>(ctx.instances.size());
    for (int b : e.body_unique) ctx.consumers[b].push_back(idx);
    ctx.instances.push_back(std::move(e));
  }
  return ctx;
}

int DepthContext::id_of(const GroundAtom& a) const {
  auto it = ids.find(a);
  return it == ids.end() ? -1 : it->second;
}

std::vector<Depth> compute_atom_depths(const DepthContext& ctx,
                                       const PremiseBase& base) {
  const int n = static_cast<int>(ctx.atoms.size());
  std::vector<int64_t> dist(n, -1);  // -1 = not reached yet
  std::vector<bool> finalized(n, false);
  std::vector<size_t> missing(ctx.instances.size());
  std::vector<int64_t> body_max(ctx.instances.size(), 0);
  for (size_t i = 0; i < ctx.instances.size(); ++i)
    missing[i] = ctx.instances[i].body_unique.size();

  using Item = std::pair<int64_t, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;

  for (const auto& f : base.ordered()) {
    if (!f.is_atom()) continue;
    int id = ctx.id_of(f.atom());
    if (id < 0) continue;  // unreferenced base atom; nothing consumes it
    if (dist[id] != 0) {
      dist[id] = 0;
      pq.emplace(0, id);
    }
  }

  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (finalized[v] || d != dist[v]) continue;
    finalized[v] = true;
    for (int idx : ctx.consumers[v]) {
      body_max[idx] = std::max(body_max[idx], d);
      if (--missing[idx] == 0) {
        int head = ctx.instances[idx].head;
        int64_t cand = 1 + body_max[idx];
        if (dist[head] < 0 || cand < dist[head]) {
          if (!finalized[head]) {
            dist[head] = cand;
            pq.emplace(cand, head);
          }
        }
      }
    }
  }

  std::vector<Depth> out(n, Depth::unreachable());
  for (int i = 0; i < n; ++i)
    if (dist[i] >= 0) out[i] = Depth::finite(dist[i]);
  return out;
}

Depth formula_depth(const DepthContext& ctx, const PremiseBase& base,
                    const Formula& q, const std::vector<Depth>& atom_depths) {
  auto atom_depth = [&](const GroundAtom& a) -> Depth {
    if (base.contains(Formula(a))) return Depth::finite(0);
    int id = ctx.id_of(a);
    if (id < 0) return Depth::unreachable();
    return atom_depths[static_cast<size_t>(id)];
  };

  const auto& c = q.conjuncts();
  Depth prev = Depth::unreachable();
  for (size_t j = 1; j <= c.size(); ++j) {
    Depth here;
    if (base.contains(q.prefix(j))) {
      here = Depth::finite(0);
    } else if (j == 1) {
      here = atom_depth(c[0]);
    } else {
      Depth a = atom_depth(c[j - 1]);
      if (prev.is_unreachable() || a.is_unreachable()) {
        here = Depth::unreachable();
      } else {
        here = Depth::finite(1 + std::max(prev.value(), a.value()));
      }
    }
    prev = here;
  }
  return prev;
}

namespace {

// Depth-minimal instance deriving atom id `v`, tie-broken by rule id then by
// the canonical order of the ground body.  Returns -1 for base atoms (depth
// 0) and unreachable atoms.
int best_instance_for(const DepthContext& ctx, const std::vector<Depth>& depths,
                      int v) {
  if (depths[static_cast<size_t>(v)].is_unreachable() ||
      depths[static_cast<size_t>(v)].value() == 0)
    return -1;
  int64_t want = depths[static_cast<size_t>(v)].value();
  int best = -1;
  std::string best_key;
  for (size_t idx = 0; idx < ctx.instances.size(); ++idx) {
    const auto& inst = ctx.instances[idx];
    if (inst.head != v) continue;
    int64_t h = 0;
    bool ok = true;
    for (int b : inst.body_unique) {
      const Depth& bd = depths[static_cast<size_t>(b)];
      if (bd.is_unreachable()) {
        ok = false;
        break;
      }
      h = std::max(h, bd.value());
    }
    if (!ok || 1 + h != want) continue;
    std::string key = std::to_string(inst.rule_id);
    key.push_back('|');
    for (int b : inst.body) {
      key += canonical_encode(Formula(ctx.atoms[static_cast<size_t>(b)]),
                              ctx.table).to_bit_text();
      key.push_back('|');
    }
    if (best < 0 || key < best_key) {
      best = static_cast<int>(idx);
      best_key = std::move(key);
    }
  }
  return best;
}

struct Workspace {
  DepthContext ctx;
  std::vector<Depth> depths;
};

Workspace make_workspace(const Formula& q, const PremiseBase& base,
                         const ProofSystem& system) {
  std::vector<GroundAtom> seeds = base.atom_members();
  for (const auto& a : q.conjuncts()) seeds.push_back(a);
  Workspace w;
  w.ctx = DepthContext::build(system, gather_constants(base, system, &q), seeds);
  w.depths = compute_atom_depths(w.ctx, base);
  return w;
}

}  // namespace

DepthResult derivation_depth(const Formula& q, const PremiseBase& base,
                             const ProofSystem& system) {
  Workspace w = make_workspace(q, base, system);
  DepthResult out;
  out.depth = formula_depth(w.ctx, base, q, w.depths);
  if (out.depth.is_unreachable() || out.depth.value() == 0) return out;

  // Atoms needed by the conjunction spine, then their rule cones.
  const auto& c = q.conjuncts();
  size_t spine_start = 0;  // deepest base prefix; conjuncts right of it derive
  for (size_t j = c.size() - 1; j >= 1; --j) {
    if (base.contains(q.prefix(j))) {
      spine_start = j;
      break;
    }
  }

  std::vector<int> needed;
  std::set<int> seen;
  auto require_atom = [&](const GroundAtom& a) {
    if (base.contains(Formula(a))) return;
    int id = w.ctx.id_of(a);
    if (id >= 0 && seen.insert(id).second) needed.push_back(id);
  };
  if (!q.is_atom()) {
    for (size_t j = spine_start; j < c.size(); ++j) require_atom(c[j]);
  } else {
    require_atom(c[0]);
  }
  // Expand cones through the chosen instances.
  for (size_t i = 0; i < needed.size(); ++i) {
    int inst = best_instance_for(w.ctx, w.depths, needed[i]);
    if (inst < 0) continue;
    for (int b : w.ctx.instances[static_cast<size_t>(inst)].body)
      require_atom(w.ctx.atoms[static_cast<size_t>(b)]);
  }

  // Emit atom steps in depth order (premises precede conclusions).
  std::sort(needed.begin(), needed.end(), [&](int a, int b) {
    int64_t da = w.depths[static_cast<size_t>(a)].value();
    int64_t db = w.depths[static_cast<size_t>(b)].value();
    if (da != db) return da < db;
    return w.ctx.atoms[static_cast<size_t>(a)] < w.ctx.atoms[static_cast<size_t>(b)];
  });
  for (int id : needed) {
    int inst = best_instance_for(w.ctx, w.depths, id);
    if (inst < 0) continue;
    const auto& e = w.ctx.instances[static_cast<size_t>(inst)];
    WitnessStep step{Formula(w.ctx.atoms[static_cast<size_t>(id)]), e.rule_id, {}};
    for (int b : e.body)
      step.premises.push_back(Formula(w.ctx.atoms[static_cast<size_t>(b)]));
    out.witness.push_back(std::move(step));
  }
  // Conjunction spine: prefixes after the last base prefix.
  if (!q.is_atom()) {
    for (size_t j = std::max<size_t>(spine_start, 1) + 1; j <= c.size(); ++j) {
      WitnessStep step{q.prefix(j), kConjIntroId, {}};
      step.premises.push_back(q.prefix(j - 1));
      step.premises.push_back(Formula(c[j - 1]));
      out.witness.push_back(std::move(step));
    }
  }
  return out;
}

std::vector<Formula> predecessors(const Formula& s, const PremiseBase& base,
                                  const ProofSystem& system) {
  if (base.contains(s))
    throw Error(Errc::kUndefinedPredecessor, "formula is a base member");
  if (!s.is_atom()) {
    if (!entails(base, system, s))
      throw Error(Errc::kUndefinedPredecessor, "formula is not derivable");
    return {s.prefix(s.width() - 1), Formula(s.last())};
  }
  Workspace w = make_workspace(s, base, system);
  int id = w.ctx.id_of(s.atom());
  if (id < 0 || w.depths[static_cast<size_t>(id)].is_unreachable())
    throw Error(Errc::kUndefinedPredecessor, "formula is not derivable");
  int inst = best_instance_for(w.ctx, w.depths, id);
  if (inst < 0)
    throw Error(Errc::kUndefinedPredecessor, "formula is a base member");
  std::vector<Formula> out;
  for (int b : w.ctx.instances[static_cast<size_t>(inst)].body)
    out.push_back(Formula(w.ctx.atoms[static_cast<size_t>(b)]));
  return out;
}

DepthProfile depth_profile(const KnowledgeBase& kb, const Formula& q,
                           const std::vector<Formula>& cache) {
  if (!kb.symbols().covers(q))
    throw Error(Errc::kUnreachableQuery, "query uses symbols outside the base");
  for (const auto& f : cache) {
    if (!kb.symbols().covers(f))
      throw Error(Errc::kInvalidArgument,
                  "cache entry uses symbols outside the base");
  }

  const PremiseBase& so = kb.operational_base();
  PremiseBase core = atom_core(kb).core;
  PremiseBase cached = so.with(cache, kb.symbols());

  std::vector<GroundAtom> seeds = so.atom_members();
  for (const auto& f : cache)
    for (const auto& a : f.conjuncts()) seeds.push_back(a);
  for (const auto& a : q.conjuncts()) seeds.push_back(a);

  std::vector<std::string> constants = kb.constants();
  for (const auto& a : q.conjuncts())
    for (const auto& arg : a.args) constants.push_back(arg);

  DepthContext ctx = DepthContext::build(kb.system(), constants, seeds);
  DepthProfile out;
  out.n_int = formula_depth(ctx, core, q, compute_atom_depths(ctx, core));
  if (out.n_int.is_unreachable())
    throw Error(Errc::kUnreachableQuery, "query is not derivable");
  out.n_op = formula_depth(ctx, so, q, compute_atom_depths(ctx, so));
  out.n_cached = formula_depth(ctx, cached, q, compute_atom_depths(ctx, cached));
  return out;
}

DepthOracle::DepthOracle(const ProofSystem& system,
                         std::vector<std::string> constants,
                         std::vector<GroundAtom> seed_atoms)
    : system_(system),
      ctx_(DepthContext::build(system, constants, seed_atoms)) {}

const std::vector<Depth>& DepthOracle::atom_depths(const PremiseBase& base) {
  auto it = cache_.find(base.digest());
  if (it != cache_.end()) return it->second;
  auto [ins, _] = cache_.emplace(base.digest(), compute_atom_depths(ctx_, base));
  return ins->second;
}

Depth DepthOracle::depth(const Formula& q, const PremiseBase& base) {
  return formula_depth(ctx_, base, q, atom_depths(base));
}

}  // namespace kbdepth
