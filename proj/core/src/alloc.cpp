#include "kbdepth/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "kbdepth/closure.hpp"
#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/parser.hpp"
#include "kbdepth/rng.hpp"

namespace kbdepth {
namespace {

constexpr double kEps = 1e-9;

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

CandidateSet load_candidates(const std::string& text, const PremiseBase& base,
                             const ProofSystem& system,
                             const SymbolTable& table,
                             const SearchLimits& limits,
                             bool require_entailed) {
  CandidateSet out;
  std::unordered_set<Formula, FormulaHash> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string body = strip(line);
    if (body.empty()) continue;

    double cost = 0.0;
    bool explicit_cost = false;
    size_t at = body.rfind("@cost=");
    if (at != std::string::npos) {
      std::string tail = strip(body.substr(at + 6));
      try {
        size_t used = 0;
        cost = std::stod(tail, &used);
        if (used != tail.size()) throw std::invalid_argument(tail);
      } catch (const std::exception&) {
        throw Error(Errc::kParse, "bad @cost value '" + tail + "'", lineno);
      }
      if (!(cost >= 0.0))
        throw Error(Errc::kParse, "@cost must be nonnegative", lineno);
      explicit_cost = true;
      body = strip(body.substr(0, at));
    }
    if (body.empty())
      throw Error(Errc::kParse, "candidate line has no formula", lineno);

    std::optional<Formula> parsed;
    try {
      parsed = parse_formula(body);
    } catch (const Error& err) {
      throw Error(Errc::kParse,
                  "bad candidate '" + body + "': " + err.what(), lineno);
    }
    CandidateItem item{std::move(*parsed), "", 0.0, false};
    if (!table.covers(item.formula))
      throw Error(Errc::kInvalidArgument,
                  "candidate uses symbols outside the knowledge base: " + body,
                  lineno);
    if (require_entailed) {
      if (base.contains(item.formula))
        throw Error(Errc::kInvalidArgument,
                    "candidate is already a base member: " + body, lineno);
      if (!entails(base, system, item.formula))
        throw Error(Errc::kInvalidArgument,
                    "candidate is not derivable from the base: " + body,
                    lineno);
    }
    if (!seen.insert(item.formula).second) continue;

    item.text = item.formula.to_string();
    item.cost = explicit_cost
                    ? cost
                    : static_cast<double>(
                          description_proxy(item.formula, base, system, table,
                                            limits)
                              .bits);
    item.cost_explicit = explicit_cost;
    out.items.push_back(std::move(item));
  }
  std::sort(out.items.begin(), out.items.end(),
            [&](const CandidateItem& a, const CandidateItem& b) {
              return canonical_less(a.formula, b.formula, table);
            });
  return out;
}

DepthObjective::DepthObjective(const ProofSystem& system,
                               const SymbolTable& table, PremiseBase baseline,
                               std::vector<WorkloadEntry> queries,
                               std::vector<Formula> items)
    : system_(system),
      table_(table),
      baseline_(std::move(baseline)),
      queries_(std::move(queries)),
      items_(std::move(items)) {
  std::vector<Formula> everything = baseline_.ordered();
  everything.insert(everything.end(), items_.begin(), items_.end());
  for (const WorkloadEntry& e : queries_) everything.push_back(e.query);
  PremiseBase aux = PremiseBase::build(everything, table_);

  std::vector<GroundAtom> seeds;
  for (const Formula& f : aux.ordered())
    for (const GroundAtom& a : f.conjuncts()) seeds.push_back(a);
  oracle_ = std::make_unique<DepthOracle>(
      system_, gather_constants(aux, system_), seeds);

  base_depths_ = depths_for({});
  for (size_t i = 0; i < queries_.size(); ++i)
    if (base_depths_[i].is_unreachable()) excluded_.push_back(i);
}

const std::vector<Depth>& DepthObjective::depths_for(
    const std::vector<uint32_t>& selection) {
  for (size_t i = 0; i < selection.size(); ++i) {
    if (selection[i] >= items_.size())
      throw Error(Errc::kInvalidArgument, "selection index out of range");
    if (i > 0 && selection[i - 1] >= selection[i])
      throw Error(Errc::kInvalidArgument, "selection must be sorted and unique");
  }
  auto it = memo_.find(selection);
  if (it != memo_.end()) return it->second;

  std::vector<Formula> extra;
  extra.reserve(selection.size());
  for (uint32_t id : selection) extra.push_back(items_[id]);
  PremiseBase base = baseline_.with(extra, table_);

  std::vector<Depth> depths;
  depths.reserve(queries_.size());
  for (const WorkloadEntry& e : queries_)
    depths.push_back(oracle_->depth(e.query, base));
  ++evals_;
  return memo_.emplace(selection, std::move(depths)).first->second;
}

double DepthObjective::delta(const std::vector<uint32_t>& selection) {
  const std::vector<Depth>& depths = depths_for(selection);
  double sum = 0.0;
  for (size_t i = 0; i < queries_.size(); ++i) {
    if (base_depths_[i].is_unreachable()) continue;
    // Supersets of the baseline keep every reachable query reachable.
    sum += queries_[i].prob *
           static_cast<double>(base_depths_[i].value() - depths[i].value());
  }
  return sum;
}

Depth DepthObjective::query_depth(size_t qi,
                                  const std::vector<uint32_t>& selection) {
  if (qi >= queries_.size())
    throw Error(Errc::kInvalidArgument, "query index out of range");
  return depths_for(selection)[qi];
}

namespace {

double selection_cost(const std::vector<uint32_t>& sel,
                      const std::vector<double>& costs) {
  double sum = 0.0;
  for (uint32_t id : sel) sum += costs[id];
  return sum;
}

std::vector<uint32_t> with_item(const std::vector<uint32_t>& sel, uint32_t u) {
  std::vector<uint32_t> out(sel);
  out.insert(std::upper_bound(out.begin(), out.end(), u), u);
  return out;
}

void greedy_fill(DepthObjective& objective, const std::vector<double>& costs,
                 double budget, std::vector<uint32_t>& sel) {
  const size_t n = objective.item_count();
  std::vector<bool> in(n, false);
  for (uint32_t id : sel) in[id] = true;
  double spent = selection_cost(sel, costs);
  for (;;) {
    double base_value = objective.delta(sel);
    double best_density = -1.0;
    int best = -1;
    for (uint32_t u = 0; u < n; ++u) {
      if (in[u] || spent + costs[u] > budget + kEps) continue;
      double marginal = objective.delta(with_item(sel, u)) - base_value;
      double density = marginal / std::max(costs[u], 1e-12);
      if (density > best_density + 1e-12) {
        best_density = density;
        best = static_cast<int>(u);
      }
    }
    if (best < 0) break;
    sel = with_item(sel, static_cast<uint32_t>(best));
    in[static_cast<size_t>(best)] = true;
    spent += costs[static_cast<size_t>(best)];
  }
}

// All sorted index subsets of size exactly k, lexicographic.
void for_each_combo(size_t n, size_t k,
                    const std::function<void(const std::vector<uint32_t>&)>& f) {
  std::vector<uint32_t> combo(k);
  auto rec = [&](auto&& self, size_t pos, uint32_t next) -> void {
    if (pos == k) {
      f(combo);
      return;
    }
    for (uint32_t v = next; v + (k - pos) <= n; ++v) {
      combo[pos] = v;
      self(self, pos + 1, v + 1);
    }
  };
  rec(rec, 0, 0);
}

}  // namespace

Allocation greedy_knapsack(DepthObjective& objective,
                           const std::vector<double>& costs, double budget,
                           size_t seed_size) {
  if (costs.size() != objective.item_count())
    throw Error(Errc::kInvalidArgument, "cost vector does not match items");
  if (!(budget >= 0.0))
    throw Error(Errc::kInvalidArgument, "budget must be nonnegative");

  Allocation best;
  best.budget = budget;
  best.delta = -std::numeric_limits<double>::infinity();
  const size_t n = objective.item_count();
  for (size_t k = 0; k <= std::min(seed_size, n); ++k) {
    for_each_combo(n, k, [&](const std::vector<uint32_t>& seed) {
      if (selection_cost(seed, costs) > budget + kEps) return;
      std::vector<uint32_t> sel(seed);
      greedy_fill(objective, costs, budget, sel);
      double value = objective.delta(sel);
      if (value > best.delta + 1e-12) {
        best.delta = value;
        best.selection = sel;
      }
    });
  }
  if (best.delta == -std::numeric_limits<double>::infinity()) {
    best.selection.clear();
    best.delta = 0.0;
  }
  best.cost = selection_cost(best.selection, costs);
  return best;
}

Allocation brute_force_opt(DepthObjective& objective,
                           const std::vector<double>& costs, double budget) {
  if (costs.size() != objective.item_count())
    throw Error(Errc::kInvalidArgument, "cost vector does not match items");
  const size_t n = objective.item_count();
  if (n > 20)
    throw Error(Errc::kTooManyCandidates,
                "exhaustive search is capped at 20 candidates");

  Allocation best;
  best.budget = budget;
  best.delta = -std::numeric_limits<double>::infinity();
  for (uint64_t mask = 0; mask < (1ull << n); ++mask) {
    std::vector<uint32_t> sel;
    for (size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) sel.push_back(static_cast<uint32_t>(i));
    if (selection_cost(sel, costs) > budget + kEps) continue;
    double value = objective.delta(sel);
    if (value > best.delta + 1e-12) {
      best.delta = value;
      best.selection = sel;
    }
  }
  if (best.delta == -std::numeric_limits<double>::infinity()) {
    best.selection.clear();
    best.delta = 0.0;
  }
  best.cost = selection_cost(best.selection, costs);
  return best;
}

namespace {

// Gains of adding u on top of A versus on top of B (A within B, u outside B),
// compared per query and in aggregate.  Returns violations appended.
void check_triple(DepthObjective& objective,
                  const std::vector<uint32_t>& small,
                  const std::vector<uint32_t>& large, uint32_t u,
                  DrReport& report) {
  std::vector<uint32_t> small_u = with_item(small, u);
  std::vector<uint32_t> large_u = with_item(large, u);

  for (size_t qi = 0; qi < objective.query_count(); ++qi) {
    bool excluded = false;
    for (size_t e : objective.excluded_queries())
      if (e == qi) excluded = true;
    if (excluded) continue;
    int64_t ga = objective.query_depth(qi, small).value() -
                 objective.query_depth(qi, small_u).value();
    int64_t gb = objective.query_depth(qi, large).value() -
                 objective.query_depth(qi, large_u).value();
    ++report.comparisons;
    if (ga < gb) {
      ++report.violations;
      if (!report.first_violation) {
        DrTriple t;
        t.small = small;
        t.large = large;
        t.added = u;
        t.scope = objective.queries()[qi].text;
        t.gain_small = static_cast<double>(ga);
        t.gain_large = static_cast<double>(gb);
        report.first_violation = std::move(t);
      }
    }
  }
  double ga = objective.delta(small_u) - objective.delta(small);
  double gb = objective.delta(large_u) - objective.delta(large);
  ++report.comparisons;
  if (ga < gb - kEps) {
    ++report.violations;
    if (!report.first_violation) {
      DrTriple t;
      t.small = small;
      t.large = large;
      t.added = u;
      t.scope = "aggregate";
      t.gain_small = ga;
      t.gain_large = gb;
      report.first_violation = std::move(t);
    }
  }
}

}  // namespace

DrReport dr_check(DepthObjective& objective, uint64_t samples, uint64_t seed,
                  size_t exhaustive_limit) {
  DrReport report;
  const size_t n = objective.item_count();
  if (n == 0) return report;

  if (n <= exhaustive_limit) {
    // Every (A, B, u): assign each non-u item to A, B\A, or outside.
    for (uint32_t u = 0; u < n; ++u) {
      std::vector<uint32_t> rest;
      for (uint32_t i = 0; i < n; ++i)
        if (i != u) rest.push_back(i);
      uint64_t total = 1;
      for (size_t i = 0; i < rest.size(); ++i) total *= 3;
      for (uint64_t code = 0; code < total; ++code) {
        std::vector<uint32_t> small, large;
        uint64_t c = code;
        for (uint32_t item : rest) {
          uint64_t part = c % 3;
          c /= 3;
          if (part <= 1) large.push_back(item);
          if (part == 0) small.push_back(item);
        }
        ++report.samples;
        check_triple(objective, small, large, u, report);
      }
    }
  } else {
    Rng rng(seed);
    for (uint64_t s = 0; s < samples; ++s) {
      uint32_t u = static_cast<uint32_t>(rng.below(n));
      std::vector<uint32_t> small, large;
      for (uint32_t i = 0; i < n; ++i) {
        if (i == u) continue;
        uint64_t part = rng.below(3);
        if (part <= 1) large.push_back(i);
        if (part == 0) small.push_back(i);
      }
      ++report.samples;
      check_triple(objective, small, large, u, report);
    }
  }
  if (report.comparisons > 0)
    report.violation_rate = static_cast<double>(report.violations) /
                            static_cast<double>(report.comparisons);
  return report;
}

}  // namespace kbdepth
