#include "kbdepth/trace.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "kbdepth/depth.hpp"
#include "kbdepth/errors.hpp"
#include "kbdepth/parser.hpp"

namespace kbdepth {
namespace {

KnowledgeBase four_atoms() { return parse_kb("p.\nq.\nr.\ns.\n"); }

TEST(TraceCodec, FifteenBitIntroduction) {
  KnowledgeBase kb = four_atoms();  // pool: p q r s, conj-intro only
  DerivationTrace trace;
  trace.base_size = 4;
  trace.steps.push_back({0, {0, 1}});
  trace.output_pointer = 4;
  TraceEncoding enc = encode_trace(trace, kb.system());
  // gamma(5) gamma(2) | rule id in 0 bits, two pointers in 2 bits each |
  // output pointer in 3 bits
  EXPECT_EQ(enc.bits.size(), 15u);
  EXPECT_EQ(enc.bits.to_bit_text(), "00101" "010" "00" "01" "100");
  EXPECT_EQ(trace_header_bits(4, 1), 11u);  // output pointer included
  EXPECT_EQ(trace_encoding_length(trace, kb.system()), 15u);

  DerivationTrace back = decode_trace(enc.bits, kb.system());
  EXPECT_EQ(back.base_size, 4u);
  ASSERT_EQ(back.steps.size(), 1u);
  EXPECT_EQ(back.steps[0].rule_id, 0u);
  EXPECT_EQ(back.steps[0].pointers, (std::vector<uint32_t>{0, 1}));
  EXPECT_EQ(back.output_pointer, 4u);

  // Canonical member order for this base is s, q, r, p.
  EXPECT_EQ(replay_validate(trace, kb.operational_base(), kb.system()),
            parse_formula("s & q"));
}

TEST(TraceCodec, PointerWidthGrowsWithPool) {
  KnowledgeBase kb = four_atoms();
  // Two steps: widths index over m + i - 1 entries for step i.
  DerivationTrace trace;
  trace.base_size = 4;
  trace.steps.push_back({0, {0, 1}});  // pool 4 -> 2-bit pointers
  trace.steps.push_back({0, {4, 2}});  // pool 5 -> 3-bit pointers
  trace.output_pointer = 5;
  TraceEncoding enc = encode_trace(trace, kb.system());
  // gamma(5)=5, gamma(3)=3, steps 2+2 and 3+3, output index_width(6)=3
  EXPECT_EQ(enc.bits.size(), 5u + 3u + 4u + 6u + 3u);
  EXPECT_EQ(trace_encoding_length(trace, kb.system()), enc.bits.size());
  EXPECT_EQ(replay_validate(trace, kb.operational_base(), kb.system()),
            parse_formula("s & q & r"));
}

TEST(TraceCodec, RoundTripOnRuleTraces) {
  KnowledgeBase kb = parse_kb(
      "e(n1,n2).\n"
      "e(n2,n3).\n"
      "t(X,Z) :- e(X,Y), e(Y,Z).\n");
  Formula q = parse_formula("t(n1,n3) & e(n1,n2)");
  DepthResult r = derivation_depth(q, kb.operational_base(), kb.system());
  DerivationTrace trace = witness_to_trace(q, r, kb.operational_base());
  TraceEncoding enc = encode_trace(trace, kb.system());
  DerivationTrace back = decode_trace(enc.bits, kb.system());
  EXPECT_EQ(back.base_size, trace.base_size);
  EXPECT_EQ(back.output_pointer, trace.output_pointer);
  ASSERT_EQ(back.steps.size(), trace.steps.size());
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    EXPECT_EQ(back.steps[i].rule_id, trace.steps[i].rule_id);
    EXPECT_EQ(back.steps[i].pointers, trace.steps[i].pointers);
  }
  EXPECT_EQ(replay_validate(back, kb.operational_base(), kb.system()), q);
  EXPECT_EQ(trace_encoding_length(trace, kb.system()), enc.bits.size());
}

TEST(Replay, PointerOutOfRange) {
  KnowledgeBase kb = four_atoms();
  DerivationTrace trace;
  trace.base_size = 4;
  trace.steps.push_back({0, {0, 9}});
  trace.output_pointer = 4;
  try {
    replay_validate(trace, kb.operational_base(), kb.system());
    FAIL() << "expected a pointer error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kPointerOutOfRange);
  }
}

TEST(Replay, ForwardPointerRejected) {
  KnowledgeBase kb = four_atoms();
  DerivationTrace trace;
  trace.base_size = 4;
  trace.steps.push_back({0, {4, 0}});  // step may not cite its own output
  trace.output_pointer = 4;
  EXPECT_THROW(replay_validate(trace, kb.operational_base(), kb.system()),
               Error);
}

TEST(Replay, ConjIntroNeedsAtomOnTheRight) {
  KnowledgeBase kb = four_atoms();
  DerivationTrace trace;
  trace.base_size = 4;
  trace.steps.push_back({0, {0, 1}});  // p & q
  trace.steps.push_back({0, {2, 4}});  // right premise is a conjunction
  trace.output_pointer = 5;
  try {
    replay_validate(trace, kb.operational_base(), kb.system());
    FAIL() << "expected a rule-application error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRuleInapplicable);
  }
}

TEST(Replay, HornRulePremisesMustMatch) {
  KnowledgeBase kb = parse_kb(
      "e(n1,n2).\n"
      "e(n2,n3).\n"
      "t(X,Z) :- e(X,Y), e(Y,Z).\n");
  DerivationTrace trace;
  trace.base_size = kb.operational_base().size();
  // e(n1,n2), e(n1,n2) do not chain: Y cannot bind consistently.
  trace.steps.push_back({1, {0, 0}});
  trace.output_pointer = trace.base_size;
  try {
    replay_validate(trace, kb.operational_base(), kb.system());
    FAIL() << "expected a rule-application error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRuleInapplicable);
  }
}

TEST(Decode, RejectsDamage) {
  KnowledgeBase kb = four_atoms();
  DerivationTrace trace;
  trace.base_size = 4;
  trace.steps.push_back({0, {0, 1}});
  trace.output_pointer = 4;
  BitString bits = encode_trace(trace, kb.system()).bits;

  BitString truncated = BitString::from_bytes(bits.bytes(), bits.size() - 3);
  EXPECT_THROW(decode_trace(truncated, kb.system()), Error);

  // Zero fill up to the byte boundary is legal; a set padding bit is not.
  BitString padded = bits;
  padded.push_back(true);
  try {
    decode_trace(padded, kb.system());
    FAIL() << "expected a decode error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDecode);
  }
}

TEST(Encode, RejectsMalformedTraces) {
  KnowledgeBase kb = parse_kb(
      "p.\n"
      "q :- p.\n");
  DerivationTrace trace;
  trace.base_size = 1;
  trace.steps.push_back({7, {0}});  // no such rule
  trace.output_pointer = 1;
  EXPECT_THROW(encode_trace(trace, kb.system()), Error);
}

TEST(Bounds, HeaderAndPerStepBudget) {
  KnowledgeBase kb = parse_kb(
      "e(n1,n2).\n"
      "e(n2,n3).\n"
      "e(n3,n4).\n"
      "t(X,Z) :- e(X,Y), e(Y,Z).\n");
  double c1 = trace_bound_c1(kb.system());
  EXPECT_GT(c1, 0.0);
  Formula q = parse_formula("t(n1,n3) & t(n2,n4)");
  DepthResult r = derivation_depth(q, kb.operational_base(), kb.system());
  DerivationTrace trace = witness_to_trace(q, r, kb.operational_base());
  TraceEncoding enc = encode_trace(trace, kb.system());
  double m = static_cast<double>(trace.base_size);
  double n = static_cast<double>(trace.steps.size());
  size_t k = kb.system().max_arity();
  double budget = trace_header_bits(trace.base_size, trace.steps.size()) +
                  k * n * std::ceil(std::log2(m + n + 1)) + c1 * n;
  EXPECT_LE(static_cast<double>(enc.bits.size()), budget);
}

}  // namespace
}  // namespace kbdepth
