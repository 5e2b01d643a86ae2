#ifndef KBDEPTH_BITSTREAM_HPP_
#define KBDEPTH_BITSTREAM_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace kbdepth {

// Big-endian bit string: bit 0 is the most significant bit of byte 0.
// Trailing bits of the last byte beyond size() are kept zero.
class BitString {
 public:
  BitString() = default;

  size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

  bool bit(size_t i) const {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
  }

  void push_back(bool b) {
    if ((nbits_ & 7) == 0) bytes_.push_back(0);
    if (b) bytes_.back() |= static_cast<uint8_t>(1u << (7 - (nbits_ & 7)));
    ++nbits_;
  }

  void append(const BitString& other) {
    for (size_t i = 0; i < other.size(); ++i) push_back(other.bit(i));
  }

  // Lowest `width` bits of `value`, most significant first.  width 0 is a no-op.
  void append_fixed(uint64_t value, unsigned width);

  // Elias gamma code of v >= 1: (b zeros, then the b+1 binary digits of v).
  void append_gamma(uint64_t v);

  std::string to_bit_text() const;   // e.g. "010011"
  std::string to_hex() const;        // zero-padded final byte

  static BitString from_bytes(const std::vector<uint8_t>& bytes, size_t nbits);

  friend bool operator==(const BitString& a, const BitString& b) {
    return a.nbits_ == b.nbits_ && a.bytes_ == b.bytes_;
  }

  // Lexicographic comparison of the bit sequences (a proper prefix sorts first).
  static int compare(const BitString& a, const BitString& b);

 private:
  std::vector<uint8_t> bytes_;
  size_t nbits_ = 0;
};

// Sequential reader over a BitString; read past the end throws Errc::kDecode.
class BitReader {
 public:
  explicit BitReader(const BitString& bits) : bits_(bits) {}

  bool read_bit();
  uint64_t read_fixed(unsigned width);  // width 0 yields 0
  uint64_t read_gamma();

  size_t position() const { return pos_; }
  size_t remaining() const { return bits_.size() - pos_; }

 private:
  const BitString& bits_;
  size_t pos_ = 0;
};

// Bits needed to index `count` distinct values; 0 when count <= 1.
unsigned index_width(uint64_t count);

// Length of the gamma code of v (v >= 1).
size_t gamma_length(uint64_t v);

}  // namespace kbdepth

#endif  // KBDEPTH_BITSTREAM_HPP_
