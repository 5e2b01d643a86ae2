#ifndef KBDEPTH_ENCODE_HPP_
#define KBDEPTH_ENCODE_HPP_

#include "kbdepth/bitstream.hpp"
#include "kbdepth/formula.hpp"
#include "kbdepth/symbols.hpp"

namespace kbdepth {

// Self-delimiting formula encoding.  Layout:
//   gamma(t)                                  conjunct count
//   per conjunct: gamma(pred_index + 1)
//                 gamma(arity + 1)
//                 per argument: gamma(const_index + 1)
// Indices come from the sorted symbol table, so the code is injective and
// independent of input presentation order.
BitString canonical_encode(const Formula& f, const SymbolTable& table);

size_t canonical_encode_length(const Formula& f, const SymbolTable& table);

// Inverse of canonical_encode over the same table (used by round-trip checks).
Formula canonical_decode(const BitString& bits, const SymbolTable& table);

// Canonical formula order: lexicographic on encoding bit strings.
bool canonical_less(const Formula& a, const Formula& b, const SymbolTable& table);

}  // namespace kbdepth

#endif  // KBDEPTH_ENCODE_HPP_
