#include "kbdepth/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "kbdepth/bitstream.hpp"
#include "kbdepth/closure.hpp"
#include "kbdepth/encode.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/parser.hpp"
#include "kbdepth/trace.hpp"

namespace kbdepth {

DescriptionProxy description_proxy(const Formula& q, const PremiseBase& base,
                                   const ProofSystem& system,
                                   const SymbolTable& table,
                                   const SearchLimits& limits) {
  DescriptionProxy out;
  out.raw_bits = canonical_encode_length(q, table) + kRawPreambleBits;

  if (base.contains(q)) {
    out.pointer_bits = trace_header_bits(base.size(), 0);
  }
  if (entails(base, system, q)) {
    ShortestTraceResult r = min_trace_length(q, base, system, limits);
    TraceEncoding enc = encode_trace(r.trace, system);
    out.trace_bits = enc.bits.size();
    out.trace_exact = r.exact;
  }

  // Cheapest branch wins; ties prefer pointer, then trace, then raw.
  out.bits = out.raw_bits;
  out.source = ProxySource::kRaw;
  if (out.trace_bits && *out.trace_bits <= out.bits) {
    out.bits = *out.trace_bits;
    out.source = ProxySource::kTrace;
  }
  if (out.pointer_bits && *out.pointer_bits <= out.bits) {
    out.bits = *out.pointer_bits;
    out.source = ProxySource::kPointer;
  }
  return out;
}

AmortizedCosts amortized_costs(const Formula& q, const PremiseBase& base,
                               const ProofSystem& system,
                               const SymbolTable& table, double frequency,
                               const CostModel& model,
                               const SearchLimits& limits) {
  if (!(frequency > 0.0))
    throw Error(Errc::kInvalidArgument, "frequency must be positive");
  DepthResult d = derivation_depth(q, base, system);
  if (!d.depth.is_finite())
    throw Error(Errc::kUnreachableQuery, "query lies outside the closure");

  AmortizedCosts out;
  out.depth = d.depth.value();
  out.proxy_bits = description_proxy(q, base, system, table, limits).bits;
  out.frequency = frequency;
  out.cost_cache = (model.rho * static_cast<double>(out.proxy_bits) +
                    static_cast<double>(out.depth)) /
                       frequency +
                   model.c_hit;
  out.cost_derive = static_cast<double>(out.depth);
  out.cache_wins = out.cost_cache < out.cost_derive;
  return out;
}

CriticalFrequency critical_frequency(const Formula& q, const PremiseBase& base,
                                     const ProofSystem& system,
                                     const SymbolTable& table,
                                     const CostModel& model,
                                     const SearchLimits& limits) {
  DepthResult d = derivation_depth(q, base, system);
  if (!d.depth.is_finite())
    throw Error(Errc::kUnreachableQuery, "query lies outside the closure");

  CriticalFrequency out;
  out.depth = d.depth.value();
  out.proxy_bits = description_proxy(q, base, system, table, limits).bits;
  out.m = base.size();
  double dd = static_cast<double>(out.depth);
  if (dd > model.c_hit) {
    out.f_star = (model.rho * static_cast<double>(out.proxy_bits) + dd) /
                 (dd - model.c_hit);
  }
  out.theory_scale =
      model.rho * std::log2(static_cast<double>(out.m) + dd);
  if (out.f_star && out.theory_scale > 0.0)
    out.ratio = *out.f_star / out.theory_scale;
  return out;
}

std::optional<double> crossover_bisect(double rho, size_t proxy_bits,
                                       int64_t depth, double c_hit,
                                       double tol) {
  double d = static_cast<double>(depth);
  if (!(d > c_hit)) return std::nullopt;
  double num = rho * static_cast<double>(proxy_bits) + d;
  auto g = [&](double f) { return num / f + c_hit - d; };
  double lo = 1e-12;
  double hi = 1.0;
  for (int i = 0; i < 200 && g(hi) > 0.0; ++i) hi *= 2.0;
  if (g(hi) > 0.0) return std::nullopt;
  for (int i = 0; i < 200 && hi - lo > tol * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

EntropyCheck coding_entropy_check(const std::vector<double>& probs) {
  if (probs.empty())
    throw Error(Errc::kInvalidArgument, "empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p > 0.0))
      throw Error(Errc::kInvalidArgument, "probabilities must be positive");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw Error(Errc::kInvalidArgument, "probabilities must sum to 1");

  EntropyCheck out;
  out.rows.resize(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) {
    double p = probs[i];
    // Minimal l >= 0 with 2^-l <= p; the float ceil gets nudged onto the
    // exact integer boundary for dyadic p.
    int l = static_cast<int>(std::ceil(-std::log2(p)));
    if (l < 0) l = 0;
    while (l > 0 && std::ldexp(1.0, -(l - 1)) <= p) --l;
    while (std::ldexp(1.0, -l) > p) ++l;
    out.rows[i].prob = p;
    out.rows[i].length = l;
    out.entropy -= p * std::log2(p);
    out.expected_length += p * static_cast<double>(l);
    out.kraft_sum += std::ldexp(1.0, -l);
  }
  out.gap = out.expected_length - out.entropy;
  out.kraft_ok = out.kraft_sum <= 1.0 + 1e-12;
  out.gap_ok = out.gap >= -1e-12 && out.gap < 1.0 + 1e-12;

  // Canonical assignment: shorter lengths first, stable by input position.
  std::vector<size_t> order(probs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (out.rows[a].length != out.rows[b].length)
      return out.rows[a].length < out.rows[b].length;
    return a < b;
  });
  uint64_t code = 0;
  int prev_len = 0;
  for (size_t k = 0; k < order.size(); ++k) {
    int len = out.rows[order[k]].length;
    if (k == 0) {
      code = 0;
    } else {
      code = (code + 1) << (len - prev_len);
    }
    prev_len = len;
    std::string bits(static_cast<size_t>(len), '0');
    for (int b = 0; b < len; ++b)
      if ((code >> (len - 1 - b)) & 1) bits[static_cast<size_t>(b)] = '1';
    out.rows[order[k]].bits = std::move(bits);
  }
  out.prefix_ok = true;
  for (size_t i = 0; i < out.rows.size() && out.prefix_ok; ++i)
    for (size_t j = 0; j < out.rows.size(); ++j) {
      if (i == j) continue;
      const std::string& a = out.rows[i].bits;
      const std::string& b = out.rows[j].bits;
      if (a.size() <= b.size() && b.compare(0, a.size(), a) == 0) {
        out.prefix_ok = false;
        break;
      }
    }
  return out;
}

LocalityReport locality_report(const KnowledgeBase& kb, const Formula& q,
                               const SearchLimits& limits) {
  CoreResult core = atom_core(kb);
  DepthResult d = derivation_depth(q, core.core, kb.system());
  if (!d.depth.is_finite())
    throw Error(Errc::kUnreachableQuery, "query lies outside the closure");
  EssResult ess = ess_plus(q, core.core, kb.system(), EssMode::kExact, limits);

  LocalityReport out = locality_symbolic(
      core.core.size(), ess.atoms.size(), d.depth.value());
  out.ess_exact = ess.exact;
  return out;
}

LocalityReport locality_symbolic(uint64_t a_size, uint64_t m_eff,
                                 int64_t depth) {
  LocalityReport out;
  out.a_size = a_size;
  out.m_eff = m_eff;
  out.depth = depth;
  out.l_full =
      std::log2(static_cast<double>(a_size) + static_cast<double>(depth));
  out.l_eff =
      std::log2(static_cast<double>(m_eff) + static_cast<double>(depth));
  if (out.l_eff > 0.0) out.improvement = out.l_full / out.l_eff;
  if (a_size > 0)
    out.lambda = static_cast<double>(m_eff) / static_cast<double>(a_size);
  return out;
}

Workload load_workload(const std::string& text) {
  Workload out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  double sum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParse, std::string("bad workload json: ") + e.what(),
                  lineno);
    }
    if (!j.is_object())
      throw Error(Errc::kParse, "workload lines must be json objects", lineno);
    if (!have_header) {
      if (!j.contains("horizon") || !j["horizon"].is_number())
        throw Error(Errc::kParse, "workload header needs a numeric horizon",
                    lineno);
      out.horizon = j["horizon"].get<double>();
      if (!(out.horizon >= 0.0))
        throw Error(Errc::kParse, "horizon must be nonnegative", lineno);
      if (j.contains("rho")) {
        if (!j["rho"].is_number() || !(j["rho"].get<double>() >= 0.0))
          throw Error(Errc::kParse, "rho must be a nonnegative number", lineno);
        out.model.rho = j["rho"].get<double>();
      }
      if (j.contains("c_hit")) {
        if (!j["c_hit"].is_number() || !(j["c_hit"].get<double>() >= 0.0))
          throw Error(Errc::kParse, "c_hit must be a nonnegative number",
                      lineno);
        out.model.c_hit = j["c_hit"].get<double>();
      }
      have_header = true;
      continue;
    }
    if (!j.contains("query") || !j["query"].is_string())
      throw Error(Errc::kParse, "workload entry needs a query string", lineno);
    if (!j.contains("prob") || !j["prob"].is_number())
      throw Error(Errc::kParse, "workload entry needs a numeric prob", lineno);
    std::string text = j["query"].get<std::string>();
    double prob = j["prob"].get<double>();
    if (!(prob > 0.0))
      throw Error(Errc::kParse, "prob must be positive", lineno);
    std::optional<Formula> parsed;
    try {
      parsed = parse_formula(text);
    } catch (const Error& err) {
      throw Error(Errc::kParse, "bad query '" + text + "': " + err.what(),
                  lineno);
    }
    sum += prob;
    out.entries.push_back({std::move(*parsed), std::move(text), prob});
  }
  if (!have_header)
    throw Error(Errc::kParse, "workload is missing its header line");
  if (out.entries.empty())
    throw Error(Errc::kParse, "workload has no queries");
  if (std::fabs(sum - 1.0) > 1e-9)
    throw Error(Errc::kParse, "workload probabilities must sum to 1");
  return out;
}

}  // namespace kbdepth
