#ifndef KBDEPTH_PARSER_HPP_
#define KBDEPTH_PARSER_HPP_

#include <string>

#include "kbdepth/kb.hpp"

namespace kbdepth {

struct ParseOptions {
  size_t max_body = kDefaultMaxBody;
};

// Knowledge-base text format, one statement per '.':
//   q(a).                       ground fact
//   p(X) :- q(X).               Horn rule (head variables must occur in body)
//   %stored                     section marker
//   p(a) & q(a).                stored formula (left-associated conjunction)
// '#' starts a comment.  Constants and predicates begin lowercase, variables
// uppercase.  Duplicate statements collapse.  Errors carry line and column.
KnowledgeBase parse_kb(const std::string& text, const ParseOptions& opts = {});

// Ground query syntax: "p(a)" or "p(a) & q(b)"; a trailing '.' is accepted.
Formula parse_formula(const std::string& text);

// Deterministic round-trip form: facts, rules, stored section.
// parse_kb(serialize_kb(kb)) reproduces the same facts/rules/stored sets.
std::string serialize_kb(const KnowledgeBase& kb);

}  // namespace kbdepth

#endif  // KBDEPTH_PARSER_HPP_
