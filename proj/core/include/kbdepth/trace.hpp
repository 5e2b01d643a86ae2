#ifndef KBDEPTH_TRACE_HPP_
#define KBDEPTH_TRACE_HPP_

#include <cstdint>
#include <vector>

#include "kbdepth/bitstream.hpp"
#include "kbdepth/depth.hpp"
#include "kbdepth/kb.hpp"

namespace kbdepth {

// One derivation step: a rule id plus pointers into the pool.  The pool
// starts as the base in canonical order (positions 0..m-1); step i's
// conclusion lands at position m+i.  Rule 0 (conj-intro) takes two pointers:
// any pool formula, then a single-atom pool entry appended on its right.
// User rules take one pointer per body atom, in body order.
struct TraceStep {
  int rule_id = 0;
  std::vector<uint32_t> pointers;
};

struct DerivationTrace {
  uint32_t base_size = 0;  // m, frozen at construction
  std::vector<TraceStep> steps;
  uint32_t output_pointer = 0;  // into [0, m + steps.size())
};

// Replays the trace against the base and returns the output formula.
// Throws kPointerOutOfRange / kRuleInapplicable / kStructuralLimit.
Formula replay_validate(const DerivationTrace& trace, const PremiseBase& base,
                        const ProofSystem& system);

// Bit-exact trace code.  Layout, big-endian throughout:
//   gamma(m + 1), gamma(n + 1)                      header
//   per step i (1-based):
//     rule id      in ceil(log2 |R|) fixed bits     (0 bits when |R| = 1)
//     one pointer  in ceil(log2 (m + i - 1)) bits   per rule premise
//   output pointer in ceil(log2 (m + n)) bits
// |R| counts the user rules plus conj-intro.  Byte form pads with zeros.
struct TraceEncoding {
  BitString bits;
  uint64_t declared_m = 0;
  uint64_t declared_n = 0;
};

TraceEncoding encode_trace(const DerivationTrace& trace, const ProofSystem& system);
DerivationTrace decode_trace(const BitString& bits, const ProofSystem& system);

// Closed-form bit length of the encoding above.
size_t trace_encoding_length(uint64_t m, const std::vector<int>& step_arities,
                             size_t rule_count);
size_t trace_encoding_length(const DerivationTrace& trace, const ProofSystem& system);

// Per-step constant in the linear length bound
//   bits <= k*n*ceil(log2(m+n+1)) + c1*n + header_bits(m, n).
size_t trace_bound_c1(const ProofSystem& system);
size_t trace_header_bits(uint64_t m, uint64_t n);

// Linearizes a depth witness into a pool trace ending at q.
// The result replays to q; its step count is the witness size.
DerivationTrace witness_to_trace(const Formula& q, const DepthResult& result,
                                 const PremiseBase& base);

}  // namespace kbdepth

#endif  // KBDEPTH_TRACE_HPP_
