#include "kbdepth/noise.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>

#include "kbdepth/bitstream.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/parser.hpp"

namespace kbdepth {
namespace {

std::set<std::string> texts(const std::vector<Formula>& fs) {
  std::set<std::string> out;
  for (const Formula& f : fs) out.insert(f.to_string());
  return out;
}

// a0 -> a1 -> ... -> a5, fact a0, plus a detached fact kept for spurious picks.
KnowledgeBase chain6() {
  return parse_kb(
      "a0.\n"
      "a1 :- a0.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n");
}

TEST(NoiseSpec, ExplicitForm) {
  KnowledgeBase kb = parse_kb("p(a).\nq(b).\nr(c).\n");
  NoiseSpec spec = load_noise_spec(
      "{\"lost\": [\"q(b)\"], \"spurious\": [\"p(b)\"]}", kb);
  EXPECT_FALSE(spec.generated);
  EXPECT_EQ(texts(spec.lost), (std::set<std::string>{"q(b)"}));
  EXPECT_EQ(texts(spec.spurious), (std::set<std::string>{"p(b)"}));

  NoisyBase nb = apply_noise(kb.operational_base(), spec, kb.symbols());
  EXPECT_EQ(nb.m, 3u);
  EXPECT_EQ(nb.m_tilde, 3u);  // one out, one in
  EXPECT_EQ(nb.preserved.size(), 2u);
  EXPECT_FALSE(nb.preserved.contains(parse_formula("q(b)")));
  EXPECT_TRUE(nb.observed.contains(parse_formula("p(b)")));
  EXPECT_FALSE(nb.observed.contains(parse_formula("q(b)")));
}

TEST(NoiseSpec, SampledFormIsSeededAndValid) {
  // 3 members inside a 6-atom ground universe: room for spurious picks.
  KnowledgeBase kb = parse_kb("p(a).\nq(b).\nr(a).\n");
  const std::string spec_text =
      "{\"loss_rate\": 0.5, \"pollution_rate\": 0.7, \"seed\": 9}";
  NoiseSpec s1 = load_noise_spec(spec_text, kb);
  NoiseSpec s2 = load_noise_spec(spec_text, kb);
  EXPECT_TRUE(s1.generated);
  EXPECT_DOUBLE_EQ(s1.loss_rate, 0.5);
  EXPECT_DOUBLE_EQ(s1.pollution_rate, 0.7);
  EXPECT_EQ(texts(s1.lost), texts(s2.lost));
  EXPECT_EQ(texts(s1.spurious), texts(s2.spurious));
  // round(0.7 * 3) spurious atoms, all valid non-members.
  EXPECT_EQ(s1.spurious.size(), 2u);
  NoisyBase nb = apply_noise(kb.operational_base(), s1, kb.symbols());
  EXPECT_EQ(nb.m_tilde, 3u - s1.lost.size() + 2u);

  // Different seeds give different draws somewhere in a short seed scan.
  bool differs = false;
  for (uint64_t seed = 10; seed < 20 && !differs; ++seed) {
    NoiseSpec s3 = load_noise_spec(
        "{\"loss_rate\": 0.5, \"pollution_rate\": 0.7, \"seed\": " +
            std::to_string(seed) + "}",
        kb);
    differs = texts(s1.lost) != texts(s3.lost) ||
              texts(s1.spurious) != texts(s3.spurious);
  }
  EXPECT_TRUE(differs);
}

TEST(NoiseSpec, RejectsMixedAndMalformedSpecs) {
  KnowledgeBase kb = parse_kb("p(a).\nq(b).\n");
  EXPECT_THROW(load_noise_spec(
                   "{\"lost\": [], \"loss_rate\": 0.5, \"pollution_rate\": 0, "
                   "\"seed\": 1}",
                   kb),
               Error);
  EXPECT_THROW(load_noise_spec("not json", kb), Error);
  EXPECT_THROW(load_noise_spec("{\"loss_rate\": 1.5, \"pollution_rate\": 0, "
                               "\"seed\": 1}",
                               kb),
               Error);
  try {
    load_noise_spec("{\"lost\": [\"zz\"], \"spurious\": []}", kb);
    FAIL() << "lost members must come from the base";
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::kLostNotSubset || e.code() == Errc::kParse ||
                e.code() == Errc::kInvalidArgument);
  }
}

TEST(ApplyNoise, ValidatesAgainstTheCleanBase) {
  KnowledgeBase kb = parse_kb("p(a).\nq(b).\n");
  NoiseSpec bad_lost;
  bad_lost.lost.push_back(parse_formula("p(b)"));
  try {
    apply_noise(kb.operational_base(), bad_lost, kb.symbols());
    FAIL() << "expected lost-not-subset";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kLostNotSubset);
  }
  NoiseSpec bad_spurious;
  bad_spurious.spurious.push_back(parse_formula("p(a)"));
  EXPECT_THROW(apply_noise(kb.operational_base(), bad_spurious, kb.symbols()),
               Error);
}

TEST(Reconstruction, WorstLostMemberSetsTheDepth) {
  // Losing a3 from the derived cache: rebuildable from a2... but a2 is also
  // not stored; from the surviving a0 it takes 3 steps.
  KnowledgeBase kb = parse_kb(
      "a0.\n"
      "a1 :- a0.\na2 :- a1.\na3 :- a2.\n"
      "%stored\n"
      "a3.\n");
  NoiseSpec spec;
  spec.lost.push_back(parse_formula("a3"));
  Depth d = reconstruction_depth(kb.operational_base(), spec, kb.system(),
                                 kb.symbols());
  EXPECT_EQ(d.value(), 3);

  // Nothing lost: recovery is free.
  NoiseSpec none;
  EXPECT_EQ(reconstruction_depth(kb.operational_base(), none, kb.system(),
                                 kb.symbols())
                .value(),
            0);

  // Losing the root makes recovery impossible.
  NoiseSpec root;
  root.lost.push_back(parse_formula("a0"));
  EXPECT_TRUE(reconstruction_depth(kb.operational_base(), root, kb.system(),
                                   kb.symbols())
                  .is_unreachable());
}

TEST(Perturbation, ChainEqualityIsTight) {
  // Query a5 sits at depth 5 with a2 cached (a2 stored: 5 = 3 + 2 wait).
  // Clean base {a0, a3-as-stored}: a5 depth = 2 via a4? a4 :- a3 -> 1, a5 -> 2.
  // Losing a3 forces the full rebuild: d_rec = 3 and a5 = 5 = 2 + 3 exactly.
  KnowledgeBase kb = parse_kb(
      "a0.\n"
      "a1 :- a0.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n"
      "%stored\n"
      "a3.\n");
  NoiseSpec spec;
  spec.lost.push_back(parse_formula("a3"));
  PerturbationReport r = perturbation_report(parse_formula("a5"),
                                             kb.operational_base(), spec,
                                             kb.system(), kb.symbols());
  EXPECT_EQ(r.clean_depth.value(), 2);
  EXPECT_EQ(r.recovery_depth.value(), 3);
  EXPECT_EQ(r.preserved_depth.value(), 5);  // equality: clean + recovery
  EXPECT_EQ(r.noisy_depth.value(), 5);      // no spurious additions
  EXPECT_TRUE(r.degrade_checked);
  EXPECT_TRUE(r.degrade_ok);
  EXPECT_TRUE(r.monotone_ok);
  EXPECT_TRUE(r.loss_only_checked);
  EXPECT_TRUE(r.loss_only_ok);
  ASSERT_TRUE(r.inflation.has_value());
  EXPECT_DOUBLE_EQ(*r.inflation, 2.5);
}

TEST(Perturbation, PollutionOnlyNeverInflates) {
  KnowledgeBase kb = chain6();
  NoiseSpec spec;
  spec.spurious.push_back(parse_formula("a3"));  // derived atom handed over
  PerturbationReport r = perturbation_report(parse_formula("a5"),
                                             kb.operational_base(), spec,
                                             kb.system(), kb.symbols());
  EXPECT_EQ(r.clean_depth.value(), 5);
  EXPECT_EQ(r.preserved_depth.value(), 5);  // nothing lost
  EXPECT_EQ(r.noisy_depth.value(), 2);      // a4, a5 from the gifted a3
  EXPECT_TRUE(r.monotone_ok);
  EXPECT_FALSE(r.loss_only_checked);  // spurious present
  ASSERT_TRUE(r.inflation.has_value());
  EXPECT_LE(*r.inflation, 1.0);
}

TEST(Conversion, BitCountIsExactlyTheFormatLength) {
  KnowledgeBase kb = parse_kb("p(a).\nq(b).\nr(c).\n");
  NoiseSpec spec;
  spec.lost.push_back(parse_formula("q(b)"));
  spec.spurious.push_back(parse_formula("p(b)"));
  // gamma(2) + gamma(2) + 2 indices into the 4-formula combined universe.
  size_t want = gamma_length(2) + gamma_length(2) + 2 * index_width(4);
  EXPECT_EQ(base_conversion_bits(kb.operational_base(), spec), want);

  NoiseSpec none;
  EXPECT_EQ(base_conversion_bits(kb.operational_base(), none),
            2 * gamma_length(1));
}

TEST(NoisyTradeoff, AllowanceCoversTheNoisyOptimum) {
  KnowledgeBase kb = parse_kb(
      "a0.\n"
      "a1 :- a0.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n"
      "%stored\n"
      "a3.\n");
  NoiseSpec spec;
  spec.lost.push_back(parse_formula("a3"));
  CostModel model;
  NoisyTradeoff r = noisy_tradeoff(parse_formula("a5"), kb, spec, 16.0, model);
  EXPECT_EQ(r.m, kb.operational_base().size());
  EXPECT_EQ(r.m_tilde, r.m - 1);
  EXPECT_EQ(r.recovery_depth.value(), 3);
  EXPECT_GT(r.conversion_bits, 0u);
  ASSERT_TRUE(r.clean_costs.has_value());
  EXPECT_TRUE(r.no_worse_checked);
  EXPECT_TRUE(r.no_worse_ok);
  EXPECT_DOUBLE_EQ(r.clean_opt,
                   std::min(r.clean_costs->cost_cache,
                            r.clean_costs->cost_derive));
  EXPECT_DOUBLE_EQ(r.noisy_opt, std::min(r.noisy_costs.cost_cache,
                                         r.noisy_costs.cost_derive));
  EXPECT_DOUBLE_EQ(
      r.allowance,
      kNoWorseC1 * model.rho * static_cast<double>(r.conversion_bits) / 16.0 +
          kNoWorseC2 * 3.0);
  EXPECT_LE(r.noisy_opt, r.allowance + 1e-9);
}

TEST(Robust, ExposurePenalizesSpuriousSupport) {
  // x2 exists only as a spurious gift, so tainted's support is half polluted
  // while ok stays clean.
  KnowledgeBase kb = parse_kb(
      "c1.\nc2.\n"
      "ok :- c1, c2.\n"
      "tainted :- c2, x2.\n"
      "top :- ok, tainted.\n");
  Workload w;
  w.horizon = 10.0;
  w.entries.push_back({parse_formula("top"), "top", 1.0});
  NoiseSpec spec;
  spec.spurious.push_back(parse_formula("x2"));
  NoisyBase nb = apply_noise(kb.operational_base(), spec, kb.symbols());
  CandidateSet cands = load_candidates("ok\ntainted\n", nb.observed,
                                       kb.system(), kb.symbols());
  ASSERT_EQ(cands.items.size(), 2u);
  uint32_t ok_idx = cands.items[0].text == "ok" ? 0 : 1;
  uint32_t tainted_idx = 1 - ok_idx;

  RobustObjective clean_sel =
      robust_objective(kb, w, spec, cands, {ok_idx}, 0.5);
  EXPECT_DOUBLE_EQ(clean_sel.lambda, 0.5);
  ASSERT_EQ(clean_sel.terms.size(), 1u);
  EXPECT_EQ(clean_sel.terms[0].polluted, 0u);
  EXPECT_DOUBLE_EQ(clean_sel.terms[0].exposure, 0.0);
  EXPECT_DOUBLE_EQ(clean_sel.penalty, 0.0);
  EXPECT_DOUBLE_EQ(clean_sel.value, clean_sel.delta);

  std::vector<uint32_t> both{std::min(ok_idx, tainted_idx),
                             std::max(ok_idx, tainted_idx)};
  RobustObjective both_sel = robust_objective(kb, w, spec, cands, both, 0.5);
  ASSERT_EQ(both_sel.terms.size(), 2u);
  double tainted_cost = 0.0;
  for (const RobustTerm& t : both_sel.terms) {
    if (t.item == tainted_idx) {
      EXPECT_EQ(t.support_size, 2u);  // {c2, x2}
      EXPECT_EQ(t.polluted, 1u);
      EXPECT_DOUBLE_EQ(t.exposure, 0.5);
      tainted_cost = cands.items[t.item].cost;
    } else {
      EXPECT_DOUBLE_EQ(t.exposure, 0.0);
    }
  }
  // Caching both caches away top's whole body: depth 2 -> 1.
  EXPECT_DOUBLE_EQ(both_sel.delta, 1.0);
  EXPECT_DOUBLE_EQ(both_sel.penalty, 0.5 * 0.5 * tainted_cost);
  EXPECT_DOUBLE_EQ(both_sel.value, both_sel.delta - both_sel.penalty);

  EXPECT_THROW(robust_objective(kb, w, spec, cands, both, -1.0), Error);
}

TEST(TwoPhase, RepairThenAllocateMeetsTheSla) {
  // Clean base stores a3; losing it pushes a5 to depth 5 > SLA 3.  Phase 1
  // must buy back a3 (recoverable from a0), landing a5 at depth 2.
  KnowledgeBase kb = parse_kb(
      "a0.\n"
      "a1 :- a0.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n"
      "%stored\n"
      "a3.\n");
  Workload w;
  w.horizon = 10.0;
  w.entries.push_back({parse_formula("a5"), "a5", 1.0});
  NoiseSpec spec;
  spec.lost.push_back(parse_formula("a3"));
  CandidateSet cands;
  {
    NoisyBase nb = apply_noise(kb.operational_base(), spec, kb.symbols());
    cands = load_candidates("a4\n", nb.observed, kb.system(), kb.symbols(), {},
                            /*require_entailed=*/false);
  }
  TwoPhaseResult r = two_phase_allocate(kb, w, spec, cands, /*sla_depth=*/3,
                                        /*budget=*/64.0);
  EXPECT_TRUE(r.feasible) << r.reason;
  EXPECT_EQ(texts(r.critical), (std::set<std::string>{"a3"}));
  EXPECT_EQ(texts(r.recoverable), (std::set<std::string>{"a3"}));
  EXPECT_TRUE(r.irrecoverable.empty());
  EXPECT_GT(r.index_bits, 0u);
  EXPECT_DOUBLE_EQ(r.comp_cost, static_cast<double>(r.index_bits));
  EXPECT_DOUBLE_EQ(r.phase2_budget, 64.0 - r.comp_cost);
  EXPECT_LE(r.max_depth.value(), 3);
  EXPECT_EQ(r.sla_depth, 3);
  EXPECT_TRUE(r.unreachable_queries.empty());
  EXPECT_TRUE(r.reason.empty());
}

TEST(TwoPhase, BudgetShortfallIsStructuredInfeasibility) {
  KnowledgeBase kb = parse_kb(
      "a0.\n"
      "a1 :- a0.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n"
      "%stored\n"
      "a3.\n");
  Workload w;
  w.horizon = 10.0;
  w.entries.push_back({parse_formula("a5"), "a5", 1.0});
  NoiseSpec spec;
  spec.lost.push_back(parse_formula("a3"));
  CandidateSet cands;
  {
    NoisyBase nb = apply_noise(kb.operational_base(), spec, kb.symbols());
    cands = load_candidates("a4\n", nb.observed, kb.system(), kb.symbols(), {},
                            false);
  }
  TwoPhaseResult r = two_phase_allocate(kb, w, spec, cands, 3, /*budget=*/0.5);
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(r.reason.empty());
  EXPECT_TRUE(r.selection.empty());

  // Irrecoverable loss can never become feasible, whatever the budget.
  NoiseSpec root;
  root.lost.push_back(parse_formula("a0"));
  root.lost.push_back(parse_formula("a3"));
  CandidateSet cands2;
  {
    NoisyBase nb = apply_noise(kb.operational_base(), root, kb.symbols());
    cands2 = load_candidates("a4\n", nb.observed, kb.system(), kb.symbols(),
                             {}, false);
  }
  TwoPhaseResult r2 =
      two_phase_allocate(kb, w, root, cands2, 3, /*budget=*/1e6);
  EXPECT_FALSE(r2.feasible);
  EXPECT_FALSE(r2.irrecoverable.empty());
  EXPECT_FALSE(r2.reason.empty());
}

}  // namespace
}  // namespace kbdepth
