#ifndef KBDEPTH_SYMBOLS_HPP_
#define KBDEPTH_SYMBOLS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kbdepth/formula.hpp"

namespace kbdepth {

// Interning table for predicate and constant symbols.  Indices are positions
// in the lexicographically sorted symbol list, so they depend only on the
// symbol set, never on input order.
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<std::string> symbols);

  static SymbolTable from_atoms(const std::vector<GroundAtom>& atoms);

  // Index of s, or throws Errc::kInvalidArgument when s is unknown.
  uint32_t index_of(const std::string& s) const;
  bool contains(const std::string& s) const;
  bool covers(const GroundAtom& a) const;
  bool covers(const Formula& f) const;

  size_t size() const { return sorted_.size(); }
  const std::string& at(uint32_t i) const { return sorted_.at(i); }
  const std::vector<std::string>& symbols() const { return sorted_; }

 private:
  std::vector<std::string> sorted_;
  std::map<std::string, uint32_t> index_;
};

}  // namespace kbdepth

#endif  // KBDEPTH_SYMBOLS_HPP_
