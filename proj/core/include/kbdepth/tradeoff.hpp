#ifndef KBDEPTH_TRADEOFF_HPP_
#define KBDEPTH_TRADEOFF_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kbdepth/depth.hpp"
#include "kbdepth/kb.hpp"
#include "kbdepth/search.hpp"

namespace kbdepth {

// Amortized cost model: caching a query costs rho * L bits of storage rent
// plus one write, spread over f uses; deriving costs its depth every time.
struct CostModel {
  double rho = 1.0;    // bits-to-steps exchange rate
  double c_hit = 1.0;  // per-use cache lookup cost
};

enum class ProxySource { kPointer, kTrace, kRaw };

// Upper bound on the description length of q given the base: the cheapest of
// a base pointer (zero-step trace), the best found derivation trace, and the
// raw canonical encoding behind a one-byte preamble.
struct DescriptionProxy {
  size_t bits = 0;
  ProxySource source = ProxySource::kRaw;
  bool trace_exact = true;  // shortest-trace search ran to completion
  std::optional<size_t> pointer_bits;  // present only for base members
  std::optional<size_t> trace_bits;    // present only for derivable q
  size_t raw_bits = 0;
};

constexpr size_t kRawPreambleBits = 8;

DescriptionProxy description_proxy(const Formula& q, const PremiseBase& base,
                                   const ProofSystem& system,
                                   const SymbolTable& table,
                                   const SearchLimits& limits = {});

struct AmortizedCosts {
  int64_t depth = 0;
  size_t proxy_bits = 0;
  double frequency = 0.0;
  double cost_cache = 0.0;   // (rho * proxy + depth) / f + c_hit
  double cost_derive = 0.0;  // depth
  bool cache_wins = false;   // strictly cheaper; ties favor deriving
};

AmortizedCosts amortized_costs(const Formula& q, const PremiseBase& base,
                               const ProofSystem& system,
                               const SymbolTable& table, double frequency,
                               const CostModel& model,
                               const SearchLimits& limits = {});

// Break-even frequency f* = (rho * proxy + depth) / (depth - c_hit) and its
// ratio to the theory scale rho * log2(m + depth).  No crossover when the
// lookup itself costs at least a full derivation.
struct CriticalFrequency {
  int64_t depth = 0;
  size_t proxy_bits = 0;
  uint64_t m = 0;
  std::optional<double> f_star;
  double theory_scale = 0.0;
  std::optional<double> ratio;
};

CriticalFrequency critical_frequency(const Formula& q, const PremiseBase& base,
                                     const ProofSystem& system,
                                     const SymbolTable& table,
                                     const CostModel& model,
                                     const SearchLimits& limits = {});

// Independent root-finder for the same crossover, used to cross-check the
// closed form: bisects cost_cache(f) - cost_derive on a doubling bracket.
std::optional<double> crossover_bisect(double rho, size_t proxy_bits,
                                       int64_t depth, double c_hit,
                                       double tol = 1e-9);

struct CodewordRow {
  double prob = 0.0;
  int length = 0;
  std::string bits;  // canonical prefix-free assignment
};

// Shannon-style integer lengths ceil(-log2 p): Kraft sum <= 1 and expected
// length within one bit of the entropy, with explicit codewords as evidence.
struct EntropyCheck {
  double entropy = 0.0;
  double expected_length = 0.0;
  double kraft_sum = 0.0;
  double gap = 0.0;  // expected - entropy
  bool kraft_ok = false;
  bool gap_ok = false;
  bool prefix_ok = false;
  std::vector<CodewordRow> rows;
};

EntropyCheck coding_entropy_check(const std::vector<double>& probs);

// Addressing cost of q against the full irredundant core versus its eventual
// essential support: log2(|A| + n) versus log2(m_eff + n).
struct LocalityReport {
  uint64_t a_size = 0;
  uint64_t m_eff = 0;
  int64_t depth = 0;
  double l_full = 0.0;
  double l_eff = 0.0;
  std::optional<double> improvement;  // l_full / l_eff, absent when l_eff = 0
  double lambda = 0.0;                // m_eff / |A|
  bool ess_exact = true;
};

LocalityReport locality_report(const KnowledgeBase& kb, const Formula& q,
                               const SearchLimits& limits = {});

// Same arithmetic from declared sizes, for scales nobody materializes.
LocalityReport locality_symbolic(uint64_t a_size, uint64_t m_eff,
                                 int64_t depth);

// Query mix: JSONL with one header object {"horizon": H, "rho": r,
// "c_hit": c} followed by {"query": "...", "prob": p} lines.  Probabilities
// must be positive and sum to 1; per-query frequency is H * p.
struct WorkloadEntry {
  Formula query;
  std::string text;
  double prob = 0.0;
};

struct Workload {
  double horizon = 0.0;
  CostModel model;
  std::vector<WorkloadEntry> entries;
};

Workload load_workload(const std::string& text);

}  // namespace kbdepth

#endif  // KBDEPTH_TRADEOFF_HPP_
