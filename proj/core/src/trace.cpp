#include "kbdepth/trace.hpp"

#include <algorithm>
#include <unordered_map>

#include "kbdepth/errors.hpp"

namespace kbdepth {

namespace {

Formula apply_step(const TraceStep& step, const std::vector<Formula>& pool,
                   const ProofSystem& system) {
  auto fetch = [&](uint32_t p) -> const Formula& {
    if (p >= pool.size())
      throw Error(Errc::kPointerOutOfRange,
                  "pointer " + std::to_string(p) + " outside pool of " +
                      std::to_string(pool.size()));
    return pool[p];
  };

  if (step.rule_id == kConjIntroId) {
    if (step.pointers.size() != kConjIntroArity)
      throw Error(Errc::kRuleInapplicable, "conj-intro takes two premises");
    const Formula& left = fetch(step.pointers[0]);
    const Formula& right = fetch(step.pointers[1]);
    if (!right.is_atom())
      throw Error(Errc::kRuleInapplicable,
                  "conj-intro right premise must be a single atom");
    if (left.width() + 1 > kMaxConjuncts)
      throw Error(Errc::kStructuralLimit, "conclusion exceeds conjunct limit");
    return left.extended(right.atom());
  }

  const Rule& rule = system.by_id(step.rule_id);
  if (step.pointers.size() != rule.body.size())
    throw Error(Errc::kRuleInapplicable, "premise count does not match body");
  std::vector<std::pair<std::string, std::string>> subst;
  for (size_t i = 0; i < rule.body.size(); ++i) {
    const Formula& premise = fetch(step.pointers[i]);
    if (!premise.is_atom())
      throw Error(Errc::kRuleInapplicable, "rule premises must be atoms");
    if (!match_atom(rule.body[i], premise.atom(), subst))
      throw Error(Errc::kRuleInapplicable,
                  "premise does not match body atom " + std::to_string(i + 1));
  }
  return Formula(substitute(rule.head, subst));
}

}  // namespace

Formula replay_validate(const DerivationTrace& trace, const PremiseBase& base,
                        const ProofSystem& system) {
  if (trace.base_size != base.size())
    throw Error(Errc::kInvalidArgument, "trace base size does not match base");
  std::vector<Formula> pool;
  pool.reserve(base.size() + trace.steps.size());
  for (const auto& f : base.ordered()) pool.push_back(f);
  for (const auto& step : trace.steps) pool.push_back(apply_step(step, pool, system));
  if (trace.output_pointer >= pool.size())
    throw Error(Errc::kPointerOutOfRange, "output pointer outside final pool");
  return pool[trace.output_pointer];
}

TraceEncoding encode_trace(const DerivationTrace& trace, const ProofSystem& system) {
  const uint64_t m = trace.base_size;
  const uint64_t n = trace.steps.size();
  const unsigned rule_bits = index_width(system.rule_count());

  TraceEncoding out;
  out.declared_m = m;
  out.declared_n = n;
  out.bits.append_gamma(m + 1);
  out.bits.append_gamma(n + 1);
  for (uint64_t i = 1; i <= n; ++i) {
    const TraceStep& step = trace.steps[static_cast<size_t>(i - 1)];
    if (step.rule_id < 0 ||
        static_cast<size_t>(step.rule_id) >= system.rule_count())
      throw Error(Errc::kInvalidArgument, "rule id outside the system");
    out.bits.append_fixed(static_cast<uint64_t>(step.rule_id), rule_bits);
    size_t arity = step.rule_id == kConjIntroId
                       ? kConjIntroArity
                       : system.by_id(step.rule_id).body.size();
    if (step.pointers.size() != arity)
      throw Error(Errc::kInvalidArgument, "pointer count does not match arity");
    unsigned w = index_width(m + i - 1);
    for (uint32_t p : step.pointers) {
      if (p >= m + i - 1)
        throw Error(Errc::kPointerOutOfRange, "pointer outside live pool");
      out.bits.append_fixed(p, w);
    }
  }
  unsigned out_w = index_width(m + n);
  if (trace.output_pointer >= m + n)
    throw Error(Errc::kPointerOutOfRange, "output pointer outside final pool");
  out.bits.append_fixed(trace.output_pointer, out_w);
  return out;
}

DerivationTrace decode_trace(const BitString& bits, const ProofSystem& system) {
  BitReader reader(bits);
  uint64_t m = reader.read_gamma() - 1;
  uint64_t n = reader.read_gamma() - 1;
  const unsigned rule_bits = index_width(system.rule_count());

  DerivationTrace trace;
  trace.base_size = static_cast<uint32_t>(m);
  for (uint64_t i = 1; i <= n; ++i) {
    TraceStep step;
    uint64_t rid = reader.read_fixed(rule_bits);
    if (rid >= system.rule_count())
      throw Error(Errc::kDecode, "decoded rule id out of range");
    step.rule_id = static_cast<int>(rid);
    size_t arity = step.rule_id == kConjIntroId
                       ? kConjIntroArity
                       : system.by_id(step.rule_id).body.size();
    unsigned w = index_width(m + i - 1);
    for (size_t j = 0; j < arity; ++j) {
      uint64_t p = reader.read_fixed(w);
      if (p >= m + i - 1)
        throw Error(Errc::kPointerOutOfRange, "decoded pointer out of range");
      step.pointers.push_back(static_cast<uint32_t>(p));
    }
    trace.steps.push_back(std::move(step));
  }
  uint64_t op = reader.read_fixed(index_width(m + n));
  if (op >= m + n)
    throw Error(Errc::kPointerOutOfRange, "decoded output pointer out of range");
  trace.output_pointer = static_cast<uint32_t>(op);
  // Any byte padding must be zero bits, fewer than eight of them.
  if (reader.remaining() >= 8)
    throw Error(Errc::kDecode, "unexpected trailing bytes");
  while (reader.remaining() > 0) {
    if (reader.read_bit())
      throw Error(Errc::kDecode, "nonzero padding bit");
  }
  return trace;
}

size_t trace_encoding_length(uint64_t m, const std::vector<int>& step_arities,
                             size_t rule_count) {
  const uint64_t n = step_arities.size();
  size_t bits = gamma_length(m + 1) + gamma_length(n + 1);
  const unsigned rule_bits = index_width(rule_count);
  for (uint64_t i = 1; i <= n; ++i) {
    bits += rule_bits;
    bits += static_cast<size_t>(step_arities[static_cast<size_t>(i - 1)]) *
            index_width(m + i - 1);
  }
  bits += index_width(m + n);
  return bits;
}

size_t trace_encoding_length(const DerivationTrace& trace,
                             const ProofSystem& system) {
  std::vector<int> arities;
  arities.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    arities.push_back(s.rule_id == kConjIntroId
                          ? kConjIntroArity
                          : static_cast<int>(system.by_id(s.rule_id).body.size()));
  }
  return trace_encoding_length(trace.base_size, arities, system.rule_count());
}

size_t trace_bound_c1(const ProofSystem& system) {
  return std::max<size_t>(1, index_width(system.rule_count()));
}

size_t trace_header_bits(uint64_t m, uint64_t n) {
  return gamma_length(m + 1) + gamma_length(n + 1) + index_width(m + n);
}

DerivationTrace witness_to_trace(const Formula& q, const DepthResult& result,
                                 const PremiseBase& base) {
  DerivationTrace trace;
  trace.base_size = static_cast<uint32_t>(base.size());

  std::unordered_map<Formula, uint32_t, FormulaHash> position;
  for (uint32_t i = 0; i < base.size(); ++i) position.emplace(base.at(i), i);

  auto locate = [&](const Formula& f) -> uint32_t {
    auto it = position.find(f);
    if (it == position.end())
      throw Error(Errc::kInvalidArgument,
                  "witness premise missing from pool: " + f.to_string());
    return it->second;
  };

  for (const auto& step : result.witness) {
    TraceStep ts;
    ts.rule_id = step.rule_id;
    for (const auto& p : step.premises) ts.pointers.push_back(locate(p));
    trace.steps.push_back(std::move(ts));
    position.emplace(step.derived,
                     static_cast<uint32_t>(base.size() + trace.steps.size() - 1));
  }
  trace.output_pointer = locate(q);
  return trace;
}

}  // namespace kbdepth
