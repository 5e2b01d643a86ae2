#include "kbdepth/formula.hpp"

#include "kbdepth/errors.hpp"

namespace kbdepth {

namespace {

bool is_ident_tail(const std::string& s) {
  for (size_t i = 1; i < s.size(); ++i) {
    char c = s[i];
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

constexpr uint64_t kFnvSeed = 1469598103934665603ull;

}  // namespace

bool is_constant_name(const std::string& s) {
  return !s.empty() && s[0] >= 'a' && s[0] <= 'z' && is_ident_tail(s);
}

bool is_variable_name(const std::string& s) {
  return !s.empty() && s[0] >= 'A' && s[0] <= 'Z' && is_ident_tail(s);
}

std::string GroundAtom::to_string() const {
  if (args.empty()) return predicate;
  std::string out = predicate;
  out.push_back('(');
  for (size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += args[i];
  }
  out.push_back(')');
  return out;
}

GroundAtom make_atom(std::string predicate, std::vector<std::string> args) {
  if (!is_constant_name(predicate))
    throw Error(Errc::kInvalidArgument, "bad predicate symbol: " + predicate);
  for (const auto& a : args) {
    if (!is_constant_name(a))
      throw Error(Errc::kInvalidArgument, "bad constant symbol: " + a);
  }
  return GroundAtom{std::move(predicate), std::move(args)};
}

Formula::Formula(std::vector<GroundAtom> conjuncts)
    : conjuncts_(std::move(conjuncts)) {
  if (conjuncts_.empty())
    throw Error(Errc::kInvalidArgument, "formula needs at least one conjunct");
  if (conjuncts_.size() > kMaxConjuncts)
    throw Error(Errc::kStructuralLimit, "formula exceeds conjunct limit");
}

Formula Formula::prefix(size_t t) const {
  if (t < 1 || t > conjuncts_.size())
    throw Error(Errc::kInvalidArgument, "prefix length out of range");
  return Formula(std::vector<GroundAtom>(conjuncts_.begin(),
                                         conjuncts_.begin() + t));
}

Formula Formula::extended(const GroundAtom& a) const {
  std::vector<GroundAtom> c = conjuncts_;
  c.push_back(a);
  return Formula(std::move(c));
}

std::string Formula::to_string() const {
  std::string out;
  for (size_t i = 0; i < conjuncts_.size(); ++i) {
    if (i > 0) out += " & ";
    out += conjuncts_[i].to_string();
  }
  return out;
}

size_t AtomHash::operator()(const GroundAtom& a) const {
  uint64_t h = fnv1a(kFnvSeed, a.predicate.data(), a.predicate.size());
  for (const auto& arg : a.args) {
    h = fnv1a(h, "\x1f", 1);
    h = fnv1a(h, arg.data(), arg.size());
  }
  return static_cast<size_t>(h);
}

size_t FormulaHash::operator()(const Formula& f) const {
  uint64_t h = kFnvSeed;
  AtomHash ah;
  for (const auto& a : f.conjuncts()) {
    h ^= ah(a) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<size_t>(h);
}

}  // namespace kbdepth
