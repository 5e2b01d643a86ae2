#include "kbdepth/census.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "kbdepth/errors.hpp"
#include "kbdepth/rng.hpp"
#include "kbdepth/search.hpp"
#include "kbdepth/trace.hpp"

namespace kbdepth {
namespace {

uint64_t isqrt(uint64_t m) {
  uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<double>(m)));
  while (r > 0 && r * r > m) --r;
  while ((r + 1) * (r + 1) <= m) ++r;
  return r;
}

// Every duplicate-free conjunction of `width` atoms drawn from `m`, counted
// when its minimal trace length equals `target`.  Order matters: (a, b) and
// (b, a) are distinct queries.
uint64_t count_by_enumeration(const KnowledgeBase& kb, uint64_t m,
                              uint64_t width, uint64_t target) {
  const PremiseBase& base = kb.operational_base();
  std::vector<GroundAtom> atoms = base.atom_members();
  std::vector<bool> used(m, false);
  std::vector<GroundAtom> pick;
  uint64_t hits = 0;
  auto recurse = [&](auto&& self, uint64_t depth_left) -> void {
    if (depth_left == 0) {
      Formula q(pick);
      ShortestTraceResult r = min_trace_length(q, base, kb.system());
      if (r.exact && r.length == target) ++hits;
      return;
    }
    for (uint64_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      used[i] = true;
      pick.push_back(atoms[i]);
      self(self, depth_left - 1);
      pick.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse, width);
  return hits;
}

}  // namespace

KnowledgeBase independent_base(uint64_t m) {
  std::vector<GroundAtom> facts;
  facts.reserve(m);
  for (uint64_t i = 0; i < m; ++i)
    facts.push_back(make_atom("e" + std::to_string(i), {}));
  return KnowledgeBase(std::move(facts), {}, ProofSystem{});
}

RichnessCensus richness_census(uint64_t m, uint64_t n, double delta0) {
  if (!(delta0 >= 0.0 && delta0 <= 1.0))
    throw Error(Errc::kInvalidArgument, "delta0 must lie in [0, 1]");
  RichnessCensus out;
  out.m = m;
  out.n = n;
  out.delta0 = delta0;

  // Falling factorial m * (m-1) * ... * (m-n): one query per ordered pick of
  // n+1 distinct atoms.  Empty when the base is too small.
  unsigned __int128 prod = 1;
  bool zero = false;
  long double log2c = 0.0L;
  for (uint64_t i = 0; i <= n; ++i) {
    if (m <= i) {
      zero = true;
      break;
    }
    uint64_t factor = m - i;
    if (!out.count_saturated) {
      prod *= factor;
      if (prod > std::numeric_limits<uint64_t>::max()) out.count_saturated = true;
    }
    log2c += std::log2(static_cast<long double>(factor));
  }
  if (zero) {
    out.count = 0;
    out.count_saturated = false;
    out.log2_count = std::numeric_limits<double>::lowest();
  } else {
    out.count = out.count_saturated ? std::numeric_limits<uint64_t>::max()
                                    : static_cast<uint64_t>(prod);
    out.log2_count = static_cast<double>(log2c);
  }

  out.bound_log2 =
      (1.0 - delta0) * static_cast<double>(n) *
      std::log2(static_cast<double>(m) + static_cast<double>(n));
  out.satisfied = !zero && out.log2_count + 1e-12 >= out.bound_log2;

  // Direct cross-check at desk scale: enumerate queries of every width that
  // could land at cost n (anything wider needs more than n introductions).
  if (m <= 7 && n <= 3) {
    KnowledgeBase kb = independent_base(m);
    uint64_t enumerated = 0;
    uint64_t max_width = std::min<uint64_t>(m, n + 2);
    for (uint64_t t = 1; t <= max_width; ++t)
      enumerated += count_by_enumeration(kb, m, t, n);
    out.enumerated = true;
    out.enumerated_count = enumerated;
    out.enumeration_matches = enumerated == (zero ? 0 : out.count);
  }
  return out;
}

TightnessSuite tightness_suite(uint64_t m, uint64_t samples, uint64_t seed) {
  if (m < 4)
    throw Error(Errc::kInvalidArgument, "tightness family needs m >= 4");
  if (m > (1u << 20))
    throw Error(Errc::kInvalidArgument, "tightness family capped at m = 2^20");
  TightnessSuite out;
  out.m = m;
  out.n = isqrt(m);
  out.samples = samples;
  out.seed = seed;
  out.denominator =
      static_cast<double>(out.n) * std::log2(static_cast<double>(m));

  KnowledgeBase kb = independent_base(m);
  const PremiseBase& base = kb.operational_base();
  std::vector<GroundAtom> atoms = base.atom_members();

  // atom_members is canonical order; map back to numeric index so the family
  // position is index-sorted regardless of lexicographic quirks (e10 < e2).
  std::vector<GroundAtom> by_index(m);
  for (uint64_t i = 0; i < m; ++i) by_index[i] = make_atom("e" + std::to_string(i), {});

  Rng rng(seed);
  out.all_depths_ok = true;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0.0;
  double sum = 0.0;
  for (uint64_t s = 0; s < samples; ++s) {
    TightnessSample row;
    row.picked = rng.sample(static_cast<uint32_t>(m),
                            static_cast<uint32_t>(out.n + 1));
    std::sort(row.picked.begin(), row.picked.end());
    std::vector<GroundAtom> conj;
    conj.reserve(row.picked.size());
    for (uint32_t idx : row.picked) conj.push_back(by_index[idx]);
    Formula q(conj);

    DepthResult d = derivation_depth(q, base, kb.system());
    if (!d.depth.is_finite() ||
        d.depth.value() != static_cast<int64_t>(out.n)) {
      out.all_depths_ok = false;
      row.depth = d.depth.is_finite() ? d.depth.value() : -1;
    } else {
      row.depth = d.depth.value();
    }

    ShortestTraceResult tr = min_trace_length(q, base, kb.system());
    TraceEncoding enc = encode_trace(tr.trace, kb.system());
    row.trace_bits = enc.bits.size();
    row.ratio = static_cast<double>(row.trace_bits) / out.denominator;
    out.min_ratio = std::min(out.min_ratio, row.ratio);
    out.max_ratio = std::max(out.max_ratio, row.ratio);
    sum += row.ratio;
    out.rows.push_back(std::move(row));
  }
  if (samples > 0) out.mean_ratio = sum / static_cast<double>(samples);
  if (out.rows.empty()) out.min_ratio = 0.0;
  return out;
}

}  // namespace kbdepth
