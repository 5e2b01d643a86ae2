#include "kbdepth/parser.hpp"

#include <algorithm>
#include <set>

#include "kbdepth/errors.hpp"

namespace kbdepth {

namespace {

enum class Tok { kIdent, kVar, kLPar, kRPar, kComma, kAmp, kArrow, kDot, kStored, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    int line = line_, col = col_;
    if (pos_ >= text_.size()) return {Tok::kEnd, "", line, col};
    char c = text_[pos_];
    if (c == '(') return take(Tok::kLPar, 1, line, col);
    if (c == ')') return take(Tok::kRPar, 1, line, col);
    if (c == ',') return take(Tok::kComma, 1, line, col);
    if (c == '&') return take(Tok::kAmp, 1, line, col);
    if (c == '.') return take(Tok::kDot, 1, line, col);
    if (c == ':') {
      if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-')
        return take(Tok::kArrow, 2, line, col);
      throw Error(Errc::kParse, "expected ':-'", line, col);
    }
    if (c == '%') {
      size_t start = pos_;
      while (pos_ < text_.size() && !isspace(static_cast<unsigned char>(text_[pos_])))
        advance();
      std::string word = text_.substr(start, pos_ - start);
      if (word == "%stored") return {Tok::kStored, word, line, col};
      throw Error(Errc::kParse, "unknown section marker " + word, line, col);
    }
    if (isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < text_.size() && (isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '_'))
        advance();
      std::string word = text_.substr(start, pos_ - start);
      Tok kind = (c >= 'A' && c <= 'Z') ? Tok::kVar : Tok::kIdent;
      return {kind, word, line, col};
    }
    throw Error(Errc::kParse, std::string("unexpected character '") + c + "'",
                line, col);
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  Token take(Tok kind, size_t len, int line, int col) {
    std::string s = text_.substr(pos_, len);
    for (size_t i = 0; i < len; ++i) advance();
    return {kind, s, line, col};
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(const std::string& text, const ParseOptions& opts)
      : lexer_(text), opts_(opts) {
    shift();
  }

  KnowledgeBase parse() {
    std::vector<GroundAtom> facts;
    std::vector<Formula> stored;
    std::vector<Rule> rules;
    bool in_stored = false;

    while (cur_.kind != Tok::kEnd) {
      if (cur_.kind == Tok::kStored) {
        if (in_stored)
          throw Error(Errc::kParse, "duplicate %stored marker", cur_.line, cur_.col);
        in_stored = true;
        shift();
        continue;
      }
      if (in_stored) {
        stored.push_back(parse_stored_formula());
        continue;
      }
      parse_fact_or_rule(facts, rules);
    }

    ProofSystem system;
    for (auto& r : rules) {
      bool dup = std::any_of(system.rules.begin(), system.rules.end(),
                             [&](const Rule& s) { return s.same_shape(r); });
      if (dup) continue;
      r.id = static_cast<int>(system.rules.size()) + 1;
      system.rules.push_back(std::move(r));
    }
    return KnowledgeBase(std::move(facts), std::move(stored), std::move(system));
  }

  Formula parse_query() {
    Formula f = parse_stored_body();
    if (cur_.kind == Tok::kDot) shift();
    expect(Tok::kEnd, "end of query");
    return f;
  }

 private:
  void shift() { cur_ = lexer_.next(); }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind)
      throw Error(Errc::kParse, std::string("expected ") + what, cur_.line, cur_.col);
  }

  AtomPattern parse_pattern() {
    expect(Tok::kIdent, "predicate symbol");
    AtomPattern p;
    p.predicate = cur_.text;
    shift();
    if (cur_.kind != Tok::kLPar) return p;
    shift();
    if (cur_.kind == Tok::kRPar) {  // explicit empty argument list
      shift();
      return p;
    }
    while (true) {
      if (cur_.kind == Tok::kIdent) {
        p.args.push_back(Term{false, cur_.text});
      } else if (cur_.kind == Tok::kVar) {
        p.args.push_back(Term{true, cur_.text});
      } else {
        throw Error(Errc::kParse, "expected constant or variable", cur_.line, cur_.col);
      }
      shift();
      if (cur_.kind == Tok::kComma) {
        shift();
        continue;
      }
      expect(Tok::kRPar, "')'");
      shift();
      return p;
    }
  }

  GroundAtom require_ground(const AtomPattern& p, int line, int col) {
    if (!p.is_ground())
      throw Error(Errc::kParse, "variables are not allowed here", line, col);
    GroundAtom a;
    a.predicate = p.predicate;
    for (const Term& t : p.args) a.args.push_back(t.text);
    return a;
  }

  void parse_fact_or_rule(std::vector<GroundAtom>& facts, std::vector<Rule>& rules) {
    int line = cur_.line, col = cur_.col;
    AtomPattern head = parse_pattern();
    if (cur_.kind == Tok::kDot) {
      facts.push_back(require_ground(head, line, col));
      shift();
      return;
    }
    expect(Tok::kArrow, "'.' or ':-'");
    shift();
    Rule rule;
    rule.head = std::move(head);
    while (true) {
      rule.body.push_back(parse_pattern());
      if (cur_.kind == Tok::kComma) {
        shift();
        continue;
      }
      break;
    }
    expect(Tok::kDot, "'.'");
    shift();
    if (rule.body.size() > opts_.max_body)
      throw Error(Errc::kBodyTooLong, "rule body exceeds limit of " +
                  std::to_string(opts_.max_body), line, col);
    // Range restriction: every head variable must occur in the body.
    std::set<std::string> body_vars;
    for (const auto& b : rule.body)
      for (const Term& t : b.args)
        if (t.is_var) body_vars.insert(t.text);
    for (const Term& t : rule.head.args) {
      if (t.is_var && body_vars.count(t.text) == 0)
        throw Error(Errc::kRangeRestriction,
                    "head variable " + t.text + " not bound in body", line, col);
    }
    rules.push_back(std::move(rule));
  }

  Formula parse_stored_body() {
    std::vector<GroundAtom> conjuncts;
    while (true) {
      int line = cur_.line, col = cur_.col;
      conjuncts.push_back(require_ground(parse_pattern(), line, col));
      if (cur_.kind == Tok::kAmp) {
        shift();
        continue;
      }
      break;
    }
    return Formula(std::move(conjuncts));
  }

  Formula parse_stored_formula() {
    Formula f = parse_stored_body();
    expect(Tok::kDot, "'.'");
    shift();
    return f;
  }

  Lexer lexer_;
  ParseOptions opts_;
  Token cur_{Tok::kEnd, "", 0, 0};
};

}  // namespace

KnowledgeBase parse_kb(const std::string& text, const ParseOptions& opts) {
  return Parser(text, opts).parse();
}

Formula parse_formula(const std::string& text) {
  return Parser(text, ParseOptions{}).parse_query();
}

std::string serialize_kb(const KnowledgeBase& kb) {
  std::vector<GroundAtom> facts = kb.facts();
  std::sort(facts.begin(), facts.end());
  std::vector<Formula> stored = kb.stored();
  std::sort(stored.begin(), stored.end());

  std::string out;
  for (const auto& a : facts) {
    out += a.to_string();
    out += ".\n";
  }
  for (const auto& r : kb.system().rules) {
    out += r.to_string();
    out += ".\n";
  }
  if (!stored.empty()) {
    out += "%stored\n";
    for (const auto& f : stored) {
      out += f.to_string();
      out += ".\n";
    }
  }
  return out;
}

}  // namespace kbdepth
