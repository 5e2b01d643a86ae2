#include "kbdepth/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "kbdepth/alloc.hpp"
#include "kbdepth/closure.hpp"
#include "kbdepth/depth.hpp"
#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/noise.hpp"
#include "kbdepth/parser.hpp"
#include "kbdepth/trace.hpp"
#include "kbdepth/tradeoff.hpp"

namespace kbdepth {

std::vector<std::pair<GroundAtom, int64_t>> naive_atom_depths(
    const PremiseBase& base, const ProofSystem& system,
    const std::vector<std::string>& constants) {
  std::vector<RuleInstance> instances = ground_rules(system, constants);
  std::unordered_map<GroundAtom, int64_t, AtomHash> depth;
  for (const GroundAtom& a : base.atom_members()) depth[a] = 0;

  for (int64_t stage = 1;; ++stage) {
    std::vector<GroundAtom> found;
    for (const RuleInstance& ri : instances) {
      if (depth.count(ri.head)) continue;
      bool ready = true;
      for (const GroundAtom& b : ri.body)
        if (!depth.count(b)) {
          ready = false;
          break;
        }
      if (ready) found.push_back(ri.head);
    }
    if (found.empty()) break;
    for (const GroundAtom& a : found) depth.emplace(a, stage);
  }

  std::vector<std::pair<GroundAtom, int64_t>> out(depth.begin(), depth.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

KnowledgeBase random_kb(Rng& rng) {
  std::vector<std::string> constants;
  uint64_t ncon = 2 + rng.below(3);
  for (uint64_t i = 0; i < ncon; ++i)
    constants.push_back("c" + std::to_string(i));

  struct Pred {
    std::string name;
    size_t arity;
  };
  std::vector<Pred> preds;
  for (uint64_t i = 0; i < 3; ++i)
    preds.push_back({"p" + std::to_string(i), rng.below(3)});

  auto random_ground = [&]() {
    const Pred& p = preds[rng.below(preds.size())];
    std::vector<std::string> args;
    for (size_t a = 0; a < p.arity; ++a)
      args.push_back(constants[rng.below(ncon)]);
    return make_atom(p.name, args);
  };

  std::vector<GroundAtom> facts;
  uint64_t nfacts = 3 + rng.below(6);
  for (uint64_t i = 0; i < nfacts; ++i) facts.push_back(random_ground());

  const char* var_names[3] = {"X", "Y", "Z"};
  ProofSystem system;
  uint64_t nrules = 1 + rng.below(4);
  for (uint64_t r = 0; r < nrules; ++r) {
    Rule rule;
    rule.id = static_cast<int>(r + 1);
    uint64_t blen = 1 + rng.below(3);
    std::vector<std::string> body_vars;
    for (uint64_t b = 0; b < blen; ++b) {
      const Pred& p = preds[rng.below(preds.size())];
      AtomPattern pat;
      pat.predicate = p.name;
      for (size_t a = 0; a < p.arity; ++a) {
        if (rng.below(2) == 0) {
          std::string v = var_names[rng.below(3)];
          pat.args.push_back({true, v});
          if (std::find(body_vars.begin(), body_vars.end(), v) ==
              body_vars.end())
            body_vars.push_back(v);
        } else {
          pat.args.push_back({false, constants[rng.below(ncon)]});
        }
      }
      rule.body.push_back(std::move(pat));
    }
    const Pred& hp = preds[rng.below(preds.size())];
    rule.head.predicate = hp.name;
    for (size_t a = 0; a < hp.arity; ++a) {
      // Range restriction by construction: head variables come from the body.
      if (!body_vars.empty() && rng.below(2) == 0)
        rule.head.args.push_back({true, body_vars[rng.below(body_vars.size())]});
      else
        rule.head.args.push_back({false, constants[rng.below(ncon)]});
    }
    system.rules.push_back(std::move(rule));
  }

  std::vector<Formula> stored;
  uint64_t nstored = rng.below(3);
  for (uint64_t s = 0; s < nstored; ++s) {
    uint64_t width = 2 + rng.below(2);
    std::vector<GroundAtom> conj;
    for (uint64_t w = 0; w < width; ++w)
      conj.push_back(facts[rng.below(facts.size())]);
    stored.push_back(Formula(conj));
  }
  return KnowledgeBase(std::move(facts), std::move(stored), std::move(system));
}

TreeInstance random_tree_instance(Rng& rng) {
  TreeInstance out;
  uint64_t natoms = 6 + rng.below(7);
  ProofSystem system;
  for (uint64_t i = 1; i < natoms; ++i) {
    Rule rule;
    rule.id = static_cast<int>(i);
    rule.head.predicate = "t" + std::to_string(i);
    AtomPattern parent;
    parent.predicate = "t" + std::to_string(rng.below(i));
    rule.body.push_back(std::move(parent));
    system.rules.push_back(std::move(rule));
  }
  std::vector<GroundAtom> facts = {make_atom("t0", {})};
  out.kb = KnowledgeBase(std::move(facts), {}, std::move(system));

  uint64_t nq = 2 + rng.below(3);
  std::vector<uint32_t> qpick =
      rng.sample(static_cast<uint32_t>(natoms - 1), static_cast<uint32_t>(nq));
  double total = 0.0;
  std::vector<double> raw;
  for (uint32_t p : qpick) {
    out.queries.push_back("t" + std::to_string(p + 1));
    raw.push_back(static_cast<double>(1 + rng.below(4)));
    total += raw.back();
  }
  for (double w : raw) out.probs.push_back(w / total);

  uint64_t nc = 2 + rng.below(4);
  std::vector<uint32_t> cpick =
      rng.sample(static_cast<uint32_t>(natoms - 1), static_cast<uint32_t>(nc));
  for (uint32_t p : cpick)
    out.candidates.push_back("t" + std::to_string(p + 1));
  std::sort(out.candidates.begin(), out.candidates.end());
  return out;
}

namespace {

struct Harness {
  SelfCheckReport* report;
  uint64_t instance = 0;

  void check(const std::string& name, bool ok, const std::string& detail) {
    ++report->checks;
    ++report->per_invariant[name];
    if (!ok) report->failures.push_back({name, instance, detail});
  }
};

void check_instance(Harness& h, const KnowledgeBase& kb, Rng& rng,
                    const SearchLimits& limits) {
  const PremiseBase& base = kb.operational_base();
  const ProofSystem& system = kb.system();
  const SymbolTable& table = kb.symbols();
  std::vector<std::string> constants = gather_constants(base, system);

  // Closure by semi-naive frontier versus naive stage iteration.
  AtomClosure closure(base, system, constants);
  auto naive = naive_atom_depths(base, system, constants);
  bool sets_equal = naive.size() == closure.atoms().size();
  for (const auto& [atom, stage] : naive)
    if (!closure.contains(atom)) sets_equal = false;
  h.check("closure-matches-stages", sets_equal,
          "derivable sets differ on " + serialize_kb(kb));

  // Queue-based depths versus stage depths, both directions.
  DepthContext ctx = DepthContext::build(system, constants, base.atom_members());
  std::vector<Depth> atom_depths = compute_atom_depths(ctx, base);
  for (const auto& [atom, stage] : naive) {
    int id = ctx.id_of(atom);
    bool ok = id >= 0 && atom_depths[static_cast<size_t>(id)].is_finite() &&
              atom_depths[static_cast<size_t>(id)].value() == stage;
    h.check("queue-matches-stages", ok,
            atom.to_string() + " stage " + std::to_string(stage));
    if (!ok) break;
  }
  {
    std::unordered_set<GroundAtom, AtomHash> naive_set;
    for (const auto& [atom, stage] : naive) naive_set.insert(atom);
    bool ok = true;
    for (size_t i = 0; i < ctx.atoms.size(); ++i)
      if (!naive_set.count(ctx.atoms[i]) && atom_depths[i].is_finite())
        ok = false;
    h.check("queue-unreachable-outside", ok, "finite depth outside closure");
  }

  // Sampled formulas: base members half the time, random conjunctions of
  // derivable atoms otherwise.
  std::vector<GroundAtom> derivable;
  for (const auto& [atom, stage] : naive) derivable.push_back(atom);
  std::vector<Formula> samples;
  for (int s = 0; s < 6; ++s) {
    if (rng.below(2) == 0 || derivable.empty()) {
      samples.push_back(base.at(rng.below(base.size())));
    } else {
      uint64_t width = 1 + rng.below(3);
      std::vector<GroundAtom> conj;
      for (uint64_t w = 0; w < width; ++w)
        conj.push_back(derivable[rng.below(derivable.size())]);
      samples.push_back(Formula(conj));
    }
  }

  for (const Formula& q : samples) {
    h.check("encode-roundtrip",
            canonical_decode(canonical_encode(q, table), table) == q,
            q.to_string());

    DepthResult d = derivation_depth(q, base, system);
    bool in_closure = entails(base, system, q);
    h.check("unreachable-consistent", d.depth.is_finite() == in_closure,
            q.to_string());
    if (!d.depth.is_finite()) {
      bool threw = false;
      try {
        min_trace_length(q, base, system, limits);
      } catch (const Error& e) {
        threw = e.code() == Errc::kUnreachableQuery;
      }
      h.check("search-rejects-unreachable", threw, q.to_string());
      continue;
    }

    DerivationTrace trace = witness_to_trace(q, d, base);
    Formula replayed = replay_validate(trace, base, system);
    h.check("witness-replays", replayed == q, q.to_string());
    h.check("witness-step-count", trace.steps.size() == d.witness.size(),
            q.to_string());

    TraceEncoding enc = encode_trace(trace, system);
    DerivationTrace back = decode_trace(enc.bits, system);
    bool same = back.base_size == trace.base_size &&
                back.output_pointer == trace.output_pointer &&
                back.steps.size() == trace.steps.size();
    for (size_t i = 0; same && i < back.steps.size(); ++i)
      same = back.steps[i].rule_id == trace.steps[i].rule_id &&
             back.steps[i].pointers == trace.steps[i].pointers;
    h.check("codec-roundtrip", same, q.to_string());
    h.check("length-closed-form",
            enc.bits.size() == trace_encoding_length(trace, system),
            q.to_string());

    uint64_t m = base.size();
    uint64_t n = trace.steps.size();
    size_t k = system.max_arity();
    size_t bound = k * n * index_width(m + n + 1) + trace_bound_c1(system) * n +
                   trace_header_bits(m, n);
    h.check("length-linear-bound", enc.bits.size() <= bound, q.to_string());

    ShortestTraceResult st = min_trace_length(q, base, system, limits);
    if (st.exact) {
      h.check("depth-below-length",
              d.depth.value() <= static_cast<int64_t>(st.length),
              q.to_string());
      h.check("length-below-witness", st.length <= trace.steps.size(),
              q.to_string());
    }

    EssResult ess = ess_plus(q, base, system, EssMode::kExact, limits);
    bool subset = true;
    for (const Formula& f : ess.atoms)
      if (!base.contains(f)) subset = false;
    h.check("support-subset", subset, q.to_string());
    if (st.exact && ess.n_exact)
      h.check("support-length", ess.n == st.length, q.to_string());
    if (base.contains(q))
      h.check("support-member",
              ess.atoms.size() == 1 && ess.atoms[0] == q && ess.n == 0,
              q.to_string());

    DescriptionProxy proxy = description_proxy(q, base, system, table, limits);
    h.check("proxy-bounded", proxy.bits <= proxy.raw_bits, q.to_string());
    if (base.contains(q))
      h.check("proxy-pointer",
              proxy.source == ProxySource::kPointer &&
                  proxy.pointer_bits && proxy.bits == *proxy.pointer_bits,
              q.to_string());
  }

  // Adding a premise never raises a depth and never revokes entailment.
  {
    std::vector<GroundAtom> herbrand = kb.herbrand_atoms();
    std::vector<Formula> fresh;
    for (const GroundAtom& a : herbrand)
      if (!base.contains(Formula(a))) fresh.push_back(Formula(a));
    if (!fresh.empty()) {
      PremiseBase bigger =
          base.with({fresh[rng.below(fresh.size())]}, table);
      for (const Formula& q : samples) {
        Depth before = derivation_depth(q, base, system).depth;
        Depth after = derivation_depth(q, bigger, system).depth;
        h.check("monotone-premises", after <= before, q.to_string());
      }
    }
  }

  // Irredundant core: same closure, nothing removable twice.
  {
    CoreResult cr = atom_core(kb);
    AtomClosure core_closure(cr.core, system, constants);
    bool equal = core_closure.atoms().size() == closure.atoms().size();
    for (const GroundAtom& a : ctx.atoms)
      if (closure.contains(a) != core_closure.contains(a)) equal = false;
    h.check("core-preserves-closure", equal, serialize_kb(kb));
    for (const Formula& s : cr.shortcuts)
      h.check("core-removal-sound", entails(cr.core, system, s), s.to_string());
    for (const Formula& member : cr.core.ordered()) {
      PremiseBase rest = cr.core.without(member, table);
      h.check("core-irredundant", !entails(rest, system, member),
              member.to_string());
    }
  }

  // Text round trip preserves the instance.
  {
    KnowledgeBase again = parse_kb(serialize_kb(kb));
    bool same = again.operational_base().digest() == base.digest() &&
                again.system().rules.size() == system.rules.size();
    for (size_t i = 0; same && i < system.rules.size(); ++i)
      same = again.system().rules[i].same_shape(system.rules[i]);
    h.check("serialize-roundtrip", same, serialize_kb(kb));
  }

  // Perturbation inequalities on a random corruption.
  {
    NoiseSpec spec;
    uint64_t nlost = rng.below(1 + base.size() / 2);
    std::vector<uint32_t> lost_pick =
        rng.sample(static_cast<uint32_t>(base.size()),
                   static_cast<uint32_t>(nlost));
    std::sort(lost_pick.begin(), lost_pick.end());
    for (uint32_t p : lost_pick) spec.lost.push_back(base.at(p));
    if (rng.below(2) == 0) {
      std::vector<Formula> fresh;
      for (const GroundAtom& a : kb.herbrand_atoms())
        if (!base.contains(Formula(a))) fresh.push_back(Formula(a));
      uint64_t nsp = fresh.empty() ? 0 : rng.below(3);
      std::vector<uint32_t> sp_pick = rng.sample(
          static_cast<uint32_t>(fresh.size()), static_cast<uint32_t>(nsp));
      std::sort(sp_pick.begin(), sp_pick.end());
      for (uint32_t p : sp_pick) spec.spurious.push_back(fresh[p]);
    }
    for (const Formula& q : samples) {
      PerturbationReport pr = perturbation_report(q, base, spec, system, table);
      h.check("perturb-monotone", pr.monotone_ok, q.to_string());
      if (pr.degrade_checked)
        h.check("perturb-degrade", pr.degrade_ok, q.to_string());
      if (pr.loss_only_checked)
        h.check("perturb-loss-only", pr.loss_only_ok, q.to_string());
    }
  }
}

void check_tree_instance(Harness& h, Rng& rng, const SearchLimits& limits) {
  TreeInstance tree = random_tree_instance(rng);
  const KnowledgeBase& kb = tree.kb;

  std::vector<WorkloadEntry> entries;
  for (size_t i = 0; i < tree.queries.size(); ++i)
    entries.push_back(
        {parse_formula(tree.queries[i]), tree.queries[i], tree.probs[i]});
  std::vector<Formula> items;
  std::vector<double> costs;
  for (const std::string& c : tree.candidates) {
    items.push_back(parse_formula(c));
    costs.push_back(static_cast<double>(1 + rng.below(8)));
  }

  DepthObjective objective(kb.system(), kb.symbols(), kb.operational_base(),
                           entries, items);
  (void)limits;

  DrReport dr = items.size() <= 5 ? dr_check(objective, 0, 0, 5)
                                  : dr_check(objective, 64, rng.next(), 0);
  h.check("tree-diminishing-returns", dr.violations == 0,
          dr.first_violation ? dr.first_violation->scope : "");

  double total = 0.0;
  for (double c : costs) total += c;
  double budget = total * (0.3 + 0.1 * static_cast<double>(rng.below(7)));
  Allocation greedy = greedy_knapsack(objective, costs, budget, 3);
  Allocation brute = brute_force_opt(objective, costs, budget);
  h.check("greedy-within-budget", greedy.cost <= budget + 1e-9,
          std::to_string(greedy.cost));
  h.check("greedy-below-optimal", greedy.delta <= brute.delta + 1e-9,
          std::to_string(greedy.delta) + " vs " + std::to_string(brute.delta));
  h.check("greedy-guarantee",
          greedy.delta + 1e-9 >= (1.0 - 1.0 / std::exp(1.0)) * brute.delta,
          std::to_string(greedy.delta) + " vs " + std::to_string(brute.delta));
}

}  // namespace

SelfCheckReport run_selfcheck(const SelfCheckOptions& opts) {
  SelfCheckReport report;
  report.instances = opts.instances;
  Harness h{&report, 0};

  for (uint64_t i = 0; i < opts.instances; ++i) {
    h.instance = i;
    Rng rng(opts.seed * 0x9E3779B97F4A7C15ull + i + 1);
    KnowledgeBase kb = random_kb(rng);
    check_instance(h, kb, rng, opts.limits);
  }

  uint64_t ntree = std::max<uint64_t>(3, opts.instances / 4);
  for (uint64_t i = 0; i < ntree; ++i) {
    h.instance = opts.instances + i;
    Rng rng(opts.seed * 0xBF58476D1CE4E5B9ull + i + 1);
    check_tree_instance(h, rng, opts.limits);
  }

  // Coding side: random integer-weight distributions.
  for (uint64_t i = 0; i < 32; ++i) {
    h.instance = opts.instances + ntree + i;
    Rng rng(opts.seed * 0x94D049BB133111EBull + i + 1);
    uint64_t size = 2 + rng.below(8);
    std::vector<double> weights;
    double total = 0.0;
    for (uint64_t k = 0; k < size; ++k) {
      weights.push_back(static_cast<double>(1 + rng.below(16)));
      total += weights.back();
    }
    for (double& w : weights) w /= total;
    EntropyCheck ec = coding_entropy_check(weights);
    h.check("coding-kraft", ec.kraft_ok, std::to_string(ec.kraft_sum));
    h.check("coding-gap", ec.gap_ok, std::to_string(ec.gap));
    h.check("coding-prefix", ec.prefix_ok, "");
  }

  // Crossover closed form against bisection.
  for (uint64_t i = 0; i < 32; ++i) {
    Rng rng(opts.seed * 0xD6E8FEB86659FD93ull + i + 1);
    double rho = 0.5 * static_cast<double>(1 + rng.below(16));
    double c_hit = 0.25 * static_cast<double>(1 + rng.below(8));
    size_t proxy = 1 + rng.below(200);
    int64_t depth = static_cast<int64_t>(rng.below(21));
    auto closed =
        static_cast<double>(depth) > c_hit
            ? std::optional<double>((rho * static_cast<double>(proxy) +
                                     static_cast<double>(depth)) /
                                    (static_cast<double>(depth) - c_hit))
            : std::nullopt;
    auto bisected = crossover_bisect(rho, proxy, depth, c_hit, 1e-10);
    bool ok;
    if (closed.has_value() != bisected.has_value()) {
      ok = false;
    } else if (!closed) {
      ok = true;
    } else {
      ok = std::fabs(*closed - *bisected) <= 1e-6 * std::max(1.0, *closed);
    }
    h.check("crossover-bisect", ok,
            closed ? std::to_string(*closed) : "none");
  }
  return report;
}

}  // namespace kbdepth
