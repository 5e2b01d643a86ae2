#include "kbdepth/census.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "kbdepth/errors.hpp"
#include "kbdepth/parser.hpp"

namespace kbdepth {
namespace {

TEST(Richness, ClosedFormMatchesEnumerationOnSmallFamilies) {
  struct Case {
    uint64_t m, n, count;
  };
  for (const Case& c : {Case{5, 2, 60}, Case{6, 2, 120}, Case{7, 3, 840}}) {
    RichnessCensus r = richness_census(c.m, c.n, 0.5);
    EXPECT_EQ(r.count, c.count) << "m=" << c.m;
    EXPECT_FALSE(r.count_saturated);
    EXPECT_TRUE(r.enumerated);
    EXPECT_EQ(r.enumerated_count, c.count);
    EXPECT_TRUE(r.enumeration_matches);
    EXPECT_NEAR(r.log2_count, std::log2(static_cast<double>(c.count)), 1e-12);
  }
}

TEST(Richness, FallingFactorialAndBound) {
  RichnessCensus r = richness_census(16, 3, 0.5);
  EXPECT_EQ(r.count, 16u * 15u * 14u * 13u);
  EXPECT_NEAR(r.bound_log2,
              (1.0 - 0.5) * 3.0 * std::log2(16.0 + 3.0), 1e-12);
  EXPECT_EQ(r.satisfied, r.log2_count >= r.bound_log2);
  EXPECT_TRUE(r.satisfied);
}

TEST(Richness, SaturationKeepsLogExact) {
  RichnessCensus r = richness_census(1u << 20, 4, 0.5);
  EXPECT_TRUE(r.count_saturated);
  EXPECT_EQ(r.count, std::numeric_limits<uint64_t>::max());
  double lg = 0.0;
  for (uint64_t i = 0; i <= 4; ++i)
    lg += std::log2(static_cast<double>((1u << 20) - i));
  EXPECT_NEAR(r.log2_count, lg, 1e-9);
  EXPECT_FALSE(r.enumerated);  // too big to enumerate
}

TEST(Richness, ZeroCountWhenFamilyIsImpossible) {
  // n + 1 > m leaves no injective pick; the count collapses to zero.
  RichnessCensus r = richness_census(3, 3, 0.5);
  EXPECT_EQ(r.count, 0u);
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.log2_count, std::numeric_limits<double>::lowest());
  EXPECT_TRUE(r.enumerated);
  EXPECT_EQ(r.enumerated_count, 0u);
  EXPECT_TRUE(r.enumeration_matches);
}

TEST(IndependentBase, ShapeAndDepths) {
  KnowledgeBase kb = independent_base(4);
  EXPECT_EQ(kb.operational_base().size(), 4u);
  EXPECT_TRUE(kb.system().rules.empty());
  // Any t distinct atoms conjoin at depth t-1; here t = 3.
  DepthResult d = derivation_depth(parse_formula("e0 & e2 & e3"),
                                   kb.operational_base(), kb.system());
  EXPECT_EQ(d.depth.value(), 2);
}

TEST(Tightness, FrozenSixteenAtomSuite) {
  TightnessSuite s = tightness_suite(16, 50, 2026);
  EXPECT_EQ(s.n, 4u);
  EXPECT_EQ(s.samples, 50u);
  EXPECT_EQ(s.rows.size(), 50u);
  EXPECT_TRUE(s.all_depths_ok);
  EXPECT_DOUBLE_EQ(s.denominator, 4.0 * std::log2(16.0));
  // One-rule system, m=16, n=4 introductions: the analytic bit count is
  // fixed, so every sample lands on the same ratio.
  EXPECT_DOUBLE_EQ(s.min_ratio, 57.0 / 16.0);
  EXPECT_DOUBLE_EQ(s.max_ratio, s.min_ratio);
  EXPECT_DOUBLE_EQ(s.mean_ratio, s.min_ratio);
  for (const TightnessSample& row : s.rows) {
    EXPECT_EQ(row.depth, 4);
    EXPECT_EQ(row.trace_bits, 57u);
    EXPECT_EQ(row.picked.size(), 5u);  // n + 1 distinct atoms
    std::set<uint32_t> uniq(row.picked.begin(), row.picked.end());
    EXPECT_EQ(uniq.size(), row.picked.size());
    for (uint32_t idx : row.picked) EXPECT_LT(idx, 16u);
  }
}

TEST(Tightness, DeterministicInSeedAndSensitiveToIt) {
  TightnessSuite a = tightness_suite(16, 10, 7);
  TightnessSuite b = tightness_suite(16, 10, 7);
  TightnessSuite c = tightness_suite(16, 10, 8);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  bool same = true, differs = false;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].picked != b.rows[i].picked) same = false;
    if (i < c.rows.size() && a.rows[i].picked != c.rows[i].picked)
      differs = true;
  }
  EXPECT_TRUE(same);
  EXPECT_TRUE(differs);
}

TEST(Tightness, LargerFamiliesStayInBand) {
  TightnessSuite s64 = tightness_suite(64, 5, 1);
  TightnessSuite s256 = tightness_suite(256, 5, 1);
  EXPECT_TRUE(s64.all_depths_ok);
  EXPECT_TRUE(s256.all_depths_ok);
  EXPECT_EQ(s64.rows[0].trace_bits, 137u);
  EXPECT_EQ(s256.rows[0].trace_bits, 321u);
  double lo = std::min({57.0 / 16.0, s64.min_ratio, s256.min_ratio});
  double hi = std::max({57.0 / 16.0, s64.max_ratio, s256.max_ratio});
  EXPECT_LE(hi / lo, 4.0);
}

TEST(Tightness, RejectsTinyFamilies) {
  try {
    tightness_suite(3, 5, 1);
    FAIL() << "expected invalid argument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidArgument);
  }
}

}  // namespace
}  // namespace kbdepth
