#include "kbdepth/bitstream.hpp"

#include <bit>

#include "kbdepth/errors.hpp"

namespace kbdepth {

void BitString::append_fixed(uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) push_back((value >> i) & 1u);
}

void BitString::append_gamma(uint64_t v) {
  if (v == 0) throw Error(Errc::kInvalidArgument, "gamma code requires v >= 1");
  unsigned digits = std::bit_width(v);
  for (unsigned i = 1; i < digits; ++i) push_back(false);
  append_fixed(v, digits);
}

std::string BitString::to_bit_text() const {
  std::string out;
  out.reserve(nbits_);
  for (size_t i = 0; i < nbits_; ++i) out.push_back(bit(i) ? '1' : '0');
  return out;
}

std::string BitString::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (uint8_t b : bytes_) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

BitString BitString::from_bytes(const std::vector<uint8_t>& bytes, size_t nbits) {
  if (nbits > bytes.size() * 8)
    throw Error(Errc::kDecode, "declared bit count exceeds payload");
  BitString out;
  out.bytes_ = bytes;
  out.nbits_ = nbits;
  // Clear any pad bits so equality stays structural.
  if (!out.bytes_.empty()) {
    size_t used = (nbits + 7) / 8;
    out.bytes_.resize(used);
    unsigned tail = nbits & 7;
    if (used > 0 && tail != 0)
      out.bytes_.back() &= static_cast<uint8_t>(0xffu << (8 - tail));
  }
  return out;
}

int BitString::compare(const BitString& a, const BitString& b) {
  size_t n = a.size() < b.size() ? a.size() : b.size();
  for (size_t i = 0; i < n; ++i) {
    bool x = a.bit(i), y = b.bit(i);
    if (x != y) return x ? 1 : -1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

bool BitReader::read_bit() {
  if (pos_ >= bits_.size()) throw Error(Errc::kDecode, "truncated bit stream");
  return bits_.bit(pos_++);
}

uint64_t BitReader::read_fixed(unsigned width) {
  uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | (read_bit() ? 1u : 0u);
  return v;
}

uint64_t BitReader::read_gamma() {
  unsigned zeros = 0;
  while (!read_bit()) {
    if (++zeros > 63) throw Error(Errc::kDecode, "gamma prefix overlong");
  }
  uint64_t v = 1;
  for (unsigned i = 0; i < zeros; ++i) v = (v << 1) | (read_bit() ? 1u : 0u);
  return v;
}

unsigned index_width(uint64_t count) {
  if (count <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(count - 1));
}

size_t gamma_length(uint64_t v) {
  return 2 * (std::bit_width(v) - 1) + 1;
}

}  // namespace kbdepth
