#include "kbdepth/encode.hpp"

#include "kbdepth/errors.hpp"

namespace kbdepth {

BitString canonical_encode(const Formula& f, const SymbolTable& table) {
  BitString bits;
  bits.append_gamma(f.width());
  for (const auto& a : f.conjuncts()) {
    bits.append_gamma(table.index_of(a.predicate) + 1);
    bits.append_gamma(a.args.size() + 1);
    for (const auto& arg : a.args) bits.append_gamma(table.index_of(arg) + 1);
  }
  return bits;
}

size_t canonical_encode_length(const Formula& f, const SymbolTable& table) {
  size_t n = gamma_length(f.width());
  for (const auto& a : f.conjuncts()) {
    n += gamma_length(table.index_of(a.predicate) + 1);
    n += gamma_length(a.args.size() + 1);
    for (const auto& arg : a.args) n += gamma_length(table.index_of(arg) + 1);
  }
  return n;
}

Formula canonical_decode(const BitString& bits, const SymbolTable& table) {
  BitReader reader(bits);
  uint64_t t = reader.read_gamma();
  if (t == 0 || t > kMaxConjuncts)
    throw Error(Errc::kDecode, "bad conjunct count");
  std::vector<GroundAtom> conjuncts;
  conjuncts.reserve(t);
  for (uint64_t i = 0; i < t; ++i) {
    uint64_t pred = reader.read_gamma();
    uint64_t arity_plus = reader.read_gamma();
    if (pred == 0 || pred > table.size())
      throw Error(Errc::kDecode, "predicate index out of range");
    GroundAtom a;
    a.predicate = table.at(static_cast<uint32_t>(pred - 1));
    for (uint64_t j = 0; j + 1 < arity_plus; ++j) {
      uint64_t c = reader.read_gamma();
      if (c == 0 || c > table.size())
        throw Error(Errc::kDecode, "constant index out of range");
      a.args.push_back(table.at(static_cast<uint32_t>(c - 1)));
    }
    conjuncts.push_back(std::move(a));
  }
  if (reader.remaining() != 0)
    throw Error(Errc::kDecode, "trailing bits after formula");
  return Formula(std::move(conjuncts));
}

bool canonical_less(const Formula& a, const Formula& b, const SymbolTable& table) {
  return BitString::compare(canonical_encode(a, table),
                            canonical_encode(b, table)) < 0;
}

}  // namespace kbdepth
