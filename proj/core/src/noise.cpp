#include "kbdepth/noise.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json.hpp"
#include "kbdepth/bitstream.hpp"
#include "kbdepth/closure.hpp"
#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/parser.hpp"
#include "kbdepth/rng.hpp"
#include "kbdepth/search.hpp"

namespace kbdepth {
namespace {

std::vector<Formula> parse_formula_array(const nlohmann::json& arr,
                                         const char* field) {
  if (!arr.is_array())
    throw Error(Errc::kParse, std::string(field) + " must be an array");
  std::vector<Formula> out;
  for (const auto& item : arr) {
    if (!item.is_string())
      throw Error(Errc::kParse, std::string(field) + " entries must be strings");
    out.push_back(parse_formula(item.get<std::string>()));
  }
  return out;
}

void validate_spec(const PremiseBase& clean, const NoiseSpec& spec) {
  std::unordered_set<Formula, FormulaHash> lost_set;
  for (const Formula& f : spec.lost) {
    if (!clean.contains(f))
      throw Error(Errc::kLostNotSubset,
                  "lost formula is not a base member: " + f.to_string());
    lost_set.insert(f);
  }
  for (const Formula& f : spec.spurious) {
    if (clean.contains(f))
      throw Error(Errc::kInvalidArgument,
                  "spurious formula is already a base member: " + f.to_string());
    if (lost_set.count(f))
      throw Error(Errc::kInvalidArgument,
                  "formula is both lost and spurious: " + f.to_string());
  }
}

}  // namespace

NoiseSpec load_noise_spec(const std::string& text, const KnowledgeBase& kb) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, std::string("bad noise json: ") + e.what());
  }
  if (!j.is_object())
    throw Error(Errc::kParse, "noise spec must be a json object");

  bool explicit_form = j.contains("lost") || j.contains("spurious");
  bool sampled_form = j.contains("loss_rate") || j.contains("pollution_rate") ||
                      j.contains("seed");
  if (explicit_form && sampled_form)
    throw Error(Errc::kParse,
                "noise spec mixes explicit lists with sampling rates");

  NoiseSpec spec;
  const PremiseBase& clean = kb.operational_base();
  if (explicit_form || !sampled_form) {
    if (j.contains("lost")) spec.lost = parse_formula_array(j["lost"], "lost");
    if (j.contains("spurious"))
      spec.spurious = parse_formula_array(j["spurious"], "spurious");
  } else {
    spec.generated = true;
    if (j.contains("loss_rate")) {
      if (!j["loss_rate"].is_number())
        throw Error(Errc::kParse, "loss_rate must be a number");
      spec.loss_rate = j["loss_rate"].get<double>();
    }
    if (j.contains("pollution_rate")) {
      if (!j["pollution_rate"].is_number())
        throw Error(Errc::kParse, "pollution_rate must be a number");
      spec.pollution_rate = j["pollution_rate"].get<double>();
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned())
        throw Error(Errc::kParse, "seed must be a nonnegative integer");
      spec.seed = j["seed"].get<uint64_t>();
    }
    if (!(spec.loss_rate >= 0.0 && spec.loss_rate <= 1.0))
      throw Error(Errc::kParse, "loss_rate must lie in [0, 1]");
    if (!(spec.pollution_rate >= 0.0))
      throw Error(Errc::kParse, "pollution_rate must be nonnegative");

    Rng rng(spec.seed);
    for (const Formula& f : clean.ordered())
      if (rng.chance(spec.loss_rate)) spec.lost.push_back(f);

    std::vector<Formula> pool;
    for (const GroundAtom& a : kb.herbrand_atoms()) {
      Formula f(a);
      if (!clean.contains(f)) pool.push_back(f);
    }
    size_t want = static_cast<size_t>(
        std::llround(spec.pollution_rate * static_cast<double>(clean.size())));
    want = std::min(want, pool.size());
    std::vector<uint32_t> picks =
        rng.sample(static_cast<uint32_t>(pool.size()),
                   static_cast<uint32_t>(want));
    std::sort(picks.begin(), picks.end());
    for (uint32_t p : picks) spec.spurious.push_back(pool[p]);
  }

  for (const Formula& f : spec.lost)
    if (!kb.symbols().covers(f))
      throw Error(Errc::kInvalidArgument,
                  "lost formula uses unknown symbols: " + f.to_string());
  for (const Formula& f : spec.spurious)
    if (!kb.symbols().covers(f))
      throw Error(Errc::kInvalidArgument,
                  "spurious formula uses unknown symbols: " + f.to_string());
  validate_spec(clean, spec);
  return spec;
}

NoisyBase apply_noise(const PremiseBase& clean, const NoiseSpec& spec,
                      const SymbolTable& table) {
  validate_spec(clean, spec);
  NoisyBase out;
  out.m = clean.size();

  std::unordered_set<Formula, FormulaHash> lost_set(spec.lost.begin(),
                                                    spec.lost.end());
  std::vector<Formula> preserved;
  for (const Formula& f : clean.ordered())
    if (!lost_set.count(f)) preserved.push_back(f);
  out.preserved = PremiseBase::build(preserved, table);

  std::vector<Formula> observed = preserved;
  observed.insert(observed.end(), spec.spurious.begin(), spec.spurious.end());
  out.observed = PremiseBase::build(observed, table);
  out.m_tilde = out.observed.size();
  return out;
}

Depth reconstruction_depth(const PremiseBase& clean, const NoiseSpec& spec,
                           const ProofSystem& system,
                           const SymbolTable& table) {
  NoisyBase noisy = apply_noise(clean, spec, table);
  Depth worst = Depth::finite(0);
  for (const Formula& b : spec.lost) {
    DepthResult d = derivation_depth(b, noisy.preserved, system);
    if (d.depth.is_unreachable()) return Depth::unreachable();
    if (worst < d.depth) worst = d.depth;
  }
  return worst;
}

PerturbationReport perturbation_report(const Formula& q,
                                       const PremiseBase& clean,
                                       const NoiseSpec& spec,
                                       const ProofSystem& system,
                                       const SymbolTable& table) {
  NoisyBase noisy = apply_noise(clean, spec, table);
  PerturbationReport out;
  out.clean_depth = derivation_depth(q, clean, system).depth;
  out.preserved_depth = derivation_depth(q, noisy.preserved, system).depth;
  out.noisy_depth = derivation_depth(q, noisy.observed, system).depth;
  out.recovery_depth = reconstruction_depth(clean, spec, system, table);

  if (out.clean_depth.is_finite() && out.recovery_depth.is_finite()) {
    out.degrade_checked = true;
    out.degrade_ok =
        out.preserved_depth.is_finite() &&
        out.preserved_depth.value() <=
            out.clean_depth.value() + out.recovery_depth.value();
  }
  out.monotone_ok = out.noisy_depth <= out.preserved_depth;
  if (spec.spurious.empty()) {
    out.loss_only_checked = true;
    out.loss_only_ok = out.clean_depth <= out.noisy_depth;
  }
  if (out.clean_depth.is_finite() && out.noisy_depth.is_finite() &&
      out.clean_depth.value() >= 1) {
    out.inflation = static_cast<double>(out.noisy_depth.value()) /
                    static_cast<double>(out.clean_depth.value());
  }
  return out;
}

size_t base_conversion_bits(const PremiseBase& clean, const NoiseSpec& spec) {
  size_t universe = clean.size() + spec.spurious.size();
  unsigned w = index_width(universe);
  size_t changes = spec.lost.size() + spec.spurious.size();
  return gamma_length(spec.lost.size() + 1) +
         gamma_length(spec.spurious.size() + 1) + changes * w;
}

NoisyTradeoff noisy_tradeoff(const Formula& q, const KnowledgeBase& kb,
                             const NoiseSpec& spec, double frequency,
                             const CostModel& model,
                             const SearchLimits& limits) {
  const PremiseBase& clean = kb.operational_base();
  NoisyBase noisy = apply_noise(clean, spec, kb.symbols());

  NoisyTradeoff out;
  out.m = noisy.m;
  out.m_tilde = noisy.m_tilde;
  out.recovery_depth = reconstruction_depth(clean, spec, kb.system(), kb.symbols());
  out.conversion_bits = base_conversion_bits(clean, spec);
  out.noisy_costs = amortized_costs(q, noisy.observed, kb.system(),
                                    kb.symbols(), frequency, model, limits);
  out.noisy_fc = critical_frequency(q, noisy.observed, kb.system(),
                                    kb.symbols(), model, limits);

  if (entails(clean, kb.system(), q)) {
    out.clean_costs = amortized_costs(q, clean, kb.system(), kb.symbols(),
                                      frequency, model, limits);
    if (out.recovery_depth.is_finite()) {
      out.no_worse_checked = true;
      out.clean_opt =
          std::min(out.clean_costs->cost_cache, out.clean_costs->cost_derive);
      out.noisy_opt =
          std::min(out.noisy_costs.cost_cache, out.noisy_costs.cost_derive);
      out.allowance =
          kNoWorseC1 * model.rho * static_cast<double>(out.conversion_bits) /
              frequency +
          kNoWorseC2 * static_cast<double>(out.recovery_depth.value());
      out.no_worse_ok = out.noisy_opt <= out.clean_opt + out.allowance + 1e-9;
    }
  }
  return out;
}

RobustObjective robust_objective(const KnowledgeBase& kb,
                                 const Workload& workload,
                                 const NoiseSpec& spec,
                                 const CandidateSet& candidates,
                                 const std::vector<uint32_t>& selection,
                                 double lambda,
                                 const SearchLimits& limits) {
  if (!(lambda >= 0.0))
    throw Error(Errc::kInvalidArgument, "lambda must be nonnegative");
  NoisyBase noisy = apply_noise(kb.operational_base(), spec, kb.symbols());

  std::vector<Formula> items;
  for (const CandidateItem& c : candidates.items) items.push_back(c.formula);
  DepthObjective objective(kb.system(), kb.symbols(), noisy.observed,
                           workload.entries, items);

  RobustObjective out;
  out.lambda = lambda;
  out.delta = objective.delta(selection);

  std::unordered_set<Formula, FormulaHash> spurious(spec.spurious.begin(),
                                                    spec.spurious.end());
  for (uint32_t id : selection) {
    EssResult ess = ess_plus(candidates.items[id].formula, noisy.observed,
                             kb.system(), EssMode::kExact, limits);
    RobustTerm term;
    term.item = id;
    term.support_size = ess.atoms.size();
    for (const Formula& f : ess.atoms) term.polluted += spurious.count(f);
    term.exposure = static_cast<double>(term.polluted) /
                    static_cast<double>(std::max<size_t>(1, term.support_size));
    out.penalty += candidates.items[id].cost * term.exposure;
    out.terms.push_back(term);
  }
  out.penalty *= lambda;
  out.value = out.delta - out.penalty;
  return out;
}

TwoPhaseResult two_phase_allocate(const KnowledgeBase& kb,
                                  const Workload& workload,
                                  const NoiseSpec& spec,
                                  const CandidateSet& candidates,
                                  int64_t sla_depth, double budget,
                                  size_t seed_size, uint64_t dr_samples,
                                  uint64_t dr_seed,
                                  const SearchLimits& limits) {
  const PremiseBase& clean = kb.operational_base();
  NoisyBase noisy = apply_noise(clean, spec, kb.symbols());

  TwoPhaseResult out;
  out.budget = budget;
  out.sla_depth = sla_depth;

  // Phase 1: which lost premises does the workload actually rely on?
  std::unordered_set<Formula, FormulaHash> needed;
  for (const WorkloadEntry& e : workload.entries) {
    if (!kb.symbols().covers(e.query) || !entails(clean, kb.system(), e.query))
      continue;
    EssResult ess =
        ess_plus(e.query, clean, kb.system(), EssMode::kExact, limits);
    needed.insert(ess.atoms.begin(), ess.atoms.end());
  }
  for (const Formula& b : spec.lost)
    if (needed.count(b)) out.critical.push_back(b);
  std::sort(out.critical.begin(), out.critical.end(),
            [&](const Formula& x, const Formula& y) {
              return canonical_less(x, y, kb.symbols());
            });
  for (const Formula& b : out.critical) {
    if (entails(noisy.observed, kb.system(), b))
      out.recoverable.push_back(b);
    else
      out.irrecoverable.push_back(b);
  }
  if (!out.irrecoverable.empty()) {
    out.reason = "irrecoverable premises: ";
    for (size_t i = 0; i < out.irrecoverable.size(); ++i)
      out.reason += (i ? ", " : "") + out.irrecoverable[i].to_string();
    out.max_depth = Depth::unreachable();
    return out;
  }

  out.index_bits = std::max(
      1u, index_width(clean.size() + spec.spurious.size()));
  out.comp_cost =
      static_cast<double>(out.recoverable.size() * out.index_bits);
  if (out.comp_cost > budget + 1e-9) {
    out.reason = "budget shortfall: compensation needs " +
                 std::to_string(out.comp_cost) + " of " +
                 std::to_string(budget) + " bits";
    out.max_depth = Depth::unreachable();
    return out;
  }
  out.phase2_budget = budget - out.comp_cost;

  // Phase 2: density greedy over the repaired base.
  PremiseBase repaired = noisy.observed.with(out.recoverable, kb.symbols());
  std::vector<Formula> kept;
  std::vector<uint32_t> kept_ids;
  for (uint32_t i = 0; i < candidates.items.size(); ++i) {
    const Formula& f = candidates.items[i].formula;
    if (!repaired.contains(f) && entails(repaired, kb.system(), f)) {
      kept.push_back(f);
      kept_ids.push_back(i);
    } else {
      out.rejected.push_back(i);
    }
  }
  DepthObjective objective(kb.system(), kb.symbols(), repaired,
                           workload.entries, kept);
  std::vector<double> costs;
  for (uint32_t i : kept_ids) costs.push_back(candidates.items[i].cost);
  Allocation alloc =
      greedy_knapsack(objective, costs, out.phase2_budget, seed_size);
  out.delta_add = alloc.delta;
  for (uint32_t id : alloc.selection) out.selection.push_back(kept_ids[id]);
  out.dr = dr_check(objective, dr_samples, dr_seed, 6);

  out.max_depth = Depth::finite(0);
  for (size_t qi = 0; qi < workload.entries.size(); ++qi) {
    Depth d = objective.query_depth(qi, alloc.selection);
    if (d.is_unreachable()) {
      out.unreachable_queries.push_back(qi);
      out.max_depth = Depth::unreachable();
    } else if (out.max_depth.is_finite() && out.max_depth < d) {
      out.max_depth = d;
    }
  }
  if (!out.unreachable_queries.empty()) {
    out.reason = "queries unreachable after repair";
    return out;
  }
  if (out.max_depth.value() > sla_depth) {
    out.reason = "worst depth " + std::to_string(out.max_depth.value()) +
                 " exceeds the bound " + std::to_string(sla_depth);
    return out;
  }
  out.feasible = true;
  return out;
}

}  // namespace kbdepth
