#ifndef KBDEPTH_ERRORS_HPP_
#define KBDEPTH_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace kbdepth {

// Failure categories surfaced to callers.  Parse/usage problems map to CLI
// exit code 2, everything else to exit code 1.
enum class Errc {
  kParse,               // malformed input text (carries line/column)
  kUsage,               // bad arguments or missing files
  kRangeRestriction,    // rule head variable absent from the body
  kBodyTooLong,         // rule body exceeds the arity cap
  kPointerOutOfRange,   // trace pointer outside the live pool
  kRuleInapplicable,    // premises do not match the rule body
  kStructuralLimit,     // conclusion exceeds formula size limits
  kDecode,              // truncated or corrupt trace bit stream
  kUnreachableQuery,    // query outside the closure where one is required
  kUndefinedPredecessor,// predecessor request on a base member or non-member
  kLostNotSubset,       // noise spec removes formulas missing from the base
  kTooManyCandidates,   // brute-force enumeration cap exceeded
  kInvalidArgument,     // other contract violation
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, int line = 0, int column = 0)
      : std::runtime_error(std::move(message)),
        code_(code), line_(line), column_(column) {}

  Errc code() const { return code_; }
  int line() const { return line_; }      // 1-based, 0 when not positional
  int column() const { return column_; }

 private:
  Errc code_;
  int line_;
  int column_;
};

}  // namespace kbdepth

#endif  // KBDEPTH_ERRORS_HPP_
