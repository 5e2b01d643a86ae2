#include "kbdepth/symbols.hpp"

#include <algorithm>

#include "kbdepth/errors.hpp"

namespace kbdepth {

SymbolTable::SymbolTable(std::vector<std::string> symbols)
    : sorted_(std::move(symbols)) {
  std::sort(sorted_.begin(), sorted_.end());
  sorted_.erase(std::unique(sorted_.begin(), sorted_.end()), sorted_.end());
  for (uint32_t i = 0; i < sorted_.size(); ++i) index_[sorted_[i]] = i;
}

SymbolTable SymbolTable::from_atoms(const std::vector<GroundAtom>& atoms) {
  std::vector<std::string> syms;
  for (const auto& a : atoms) {
    syms.push_back(a.predicate);
    for (const auto& arg : a.args) syms.push_back(arg);
  }
  return SymbolTable(std::move(syms));
}

uint32_t SymbolTable::index_of(const std::string& s) const {
  auto it = index_.find(s);
  if (it == index_.end())
    throw Error(Errc::kInvalidArgument, "symbol not in table: " + s);
  return it->second;
}

bool SymbolTable::contains(const std::string& s) const {
  return index_.count(s) != 0;
}

bool SymbolTable::covers(const GroundAtom& a) const {
  if (!contains(a.predicate)) return false;
  for (const auto& arg : a.args)
    if (!contains(arg)) return false;
  return true;
}

bool SymbolTable::covers(const Formula& f) const {
  for (const auto& a : f.conjuncts())
    if (!covers(a)) return false;
  return true;
}

}  // namespace kbdepth
