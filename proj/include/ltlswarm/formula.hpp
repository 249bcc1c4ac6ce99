#pragma once
//
// Linear temporal logic over named atomic propositions, together with the
// ultimately-periodic words ("lassos") that the planner reasons about.
//
// KEY DESIGN DECISIONS
//  - Formulas are immutable trees behind shared_ptr; copies are cheap and
//    subtrees are freely shared.  Every node caches its fully parenthesized
//    canonical text, which doubles as the equality/ordering/hash key, so
//    formula sets and maps are deterministic across runs and platforms.
//  - The release operator (dual of until) cannot be written in the input
//    syntax; it exists only so that negation normal form stays closed.
//  - A letter is a *set* of atoms: one position of a word may carry several
//    labels at once (an action bundle plus the hosting region's label).
//  - eval_lasso decides satisfaction exactly.  A lasso denotes an infinite
//    word, but on the finite prefix+cycle graph every temporal operator is a
//    fixed point, so truth tables converge after at most one pass per
//    position and the result equals the infinite-word semantics.
//

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ltlswarm/errors.hpp"

namespace ltlswarm {

// ── Syntax ──────────────────────────────────────────────────────────────────

enum class Op : std::uint8_t {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Next,
  Until,
  Release, // internal: produced by to_nnf, not accepted by parse
  Eventually,
  Always,
};

class Formula {
public:
  Formula() : Formula(tt()) {}

  static Formula tt() { return leaf(Op::True, "true"); }
  static Formula ff() { return leaf(Op::False, "false"); }

  static Formula atom(std::string name) {
    return Formula(std::make_shared<const Node>(Node{Op::Atom, name, nullptr, nullptr, name}));
  }

  static Formula negation(Formula a) { return unary(Op::Not, "!", std::move(a)); }
  static Formula next(Formula a) { return unary(Op::Next, "X", std::move(a)); }
  static Formula eventually(Formula a) { return unary(Op::Eventually, "F", std::move(a)); }
  static Formula always(Formula a) { return unary(Op::Always, "G", std::move(a)); }

  static Formula conj(Formula a, Formula b) { return binary(Op::And, "&", std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Op::Or, "|", std::move(a), std::move(b)); }
  static Formula until(Formula a, Formula b) { return binary(Op::Until, "U", std::move(a), std::move(b)); }
  static Formula release(Formula a, Formula b) { return binary(Op::Release, "R", std::move(a), std::move(b)); }

  Op op() const { return node_->op; }

  // Atom name; only meaningful when op() == Op::Atom.
  const std::string& name() const { return node_->name; }

  // Child accessors.  Unary operators use left(); leaves have none.
  Formula left() const { return Formula(node_->lhs); }
  Formula right() const { return Formula(node_->rhs); }

  bool is_leaf() const { return node_->lhs == nullptr; }
  bool is_unary() const { return node_->lhs != nullptr && node_->rhs == nullptr; }
  bool is_binary() const { return node_->rhs != nullptr; }

  // Canonical fully parenthesized rendering; also the comparison key.
  const std::string& str() const { return node_->text; }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.node_ == b.node_ || a.node_->text == b.node_->text;
  }
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
  friend bool operator<(const Formula& a, const Formula& b) {
    return a.node_ != b.node_ && a.node_->text < b.node_->text;
  }

  // Distinct subformulas (this one included), children before parents,
  // deduplicated, deterministically ordered.
  std::vector<Formula> subformulas() const {
    std::vector<Formula> out;
    std::set<std::string> seen;
    collect(*this, out, seen);
    return out;
  }

  // Atom names occurring anywhere in the formula.
  std::set<std::string> atoms() const {
    std::set<std::string> out;
    for (const Formula& f : subformulas())
      if (f.op() == Op::Atom) out.insert(f.name());
    return out;
  }

private:
  struct Node {
    Op op;
    std::string name; // atom name, empty otherwise
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    std::string text;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula leaf(Op op, const char* text) {
    return Formula(std::make_shared<const Node>(Node{op, "", nullptr, nullptr, text}));
  }

  static Formula unary(Op op, const char* sym, Formula a) {
    std::string text = std::string(sym) + " " + wrap(a);
    return Formula(std::make_shared<const Node>(Node{op, "", a.node_, nullptr, std::move(text)}));
  }

  static Formula binary(Op op, const char* sym, Formula a, Formula b) {
    std::string text = "(" + a.str() + " " + sym + " " + b.str() + ")";
    return Formula(std::make_shared<const Node>(Node{op, "", a.node_, b.node_, std::move(text)}));
  }

  static std::string wrap(const Formula& f) {
    if (f.is_leaf() || f.is_binary()) return f.str(); // binary text is already parenthesized
    return "(" + f.str() + ")";
  }

  static void collect(const Formula& f, std::vector<Formula>& out, std::set<std::string>& seen) {
    if (seen.count(f.str())) return;
    if (f.node_->lhs) collect(f.left(), out, seen);
    if (f.node_->rhs) collect(f.right(), out, seen);
    seen.insert(f.str());
    out.push_back(f);
  }

  std::shared_ptr<const Node> node_;
};

inline std::string to_string(const Formula& f) { return f.str(); }

// ── Parsing ─────────────────────────────────────────────────────────────────
//
// Grammar (loosest to tightest): |  <  &  <  U  <  unary (! X F G).
// U is right-associative; & and | associate to the left.  Atoms match
// [a-z][a-z0-9_]*; `true` and `false` are reserved words.

namespace detail {

struct Token {
  enum Kind { Atom, True, False, Not, And, Or, Next, Until, Ev, Alw, LParen, RParen, End } kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_lower = [](char c) { return c >= 'a' && c <= 'z'; };
  auto is_body = [&](char c) { return is_lower(c) || (c >= '0' && c <= '9') || c == '_'; };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
      case '!': out.push_back({Token::Not, "!", start}); ++i; continue;
      case '&': out.push_back({Token::And, "&", start}); ++i; continue;
      case '|': out.push_back({Token::Or, "|", start}); ++i; continue;
      case '(': out.push_back({Token::LParen, "(", start}); ++i; continue;
      case ')': out.push_back({Token::RParen, ")", start}); ++i; continue;
      case 'X': out.push_back({Token::Next, "X", start}); ++i; continue;
      case 'U': out.push_back({Token::Until, "U", start}); ++i; continue;
      case 'F': out.push_back({Token::Ev, "F", start}); ++i; continue;
      case 'G': out.push_back({Token::Alw, "G", start}); ++i; continue;
      default: break;
    }
    if (is_lower(c)) {
      std::size_t j = i + 1;
      while (j < text.size() && is_body(text[j])) ++j;
      std::string word = text.substr(i, j - i);
      i = j;
      if (word == "true")
        out.push_back({Token::True, word, start});
      else if (word == "false")
        out.push_back({Token::False, word, start});
      else
        out.push_back({Token::Atom, word, start});
      continue;
    }
    throw ParseError("unknown token '" + std::string(1, c) + "'", start);
  }
  out.push_back({Token::End, "", text.size()});
  return out;
}

class Parser {
public:
  explicit Parser(const std::string& text) : tokens_(lex(text)) {}

  Formula run() {
    Formula f = parse_or();
    expect(Token::End, "trailing input after formula");
    return f;
  }

private:
  const Token& peek() const { return tokens_[at_]; }
  Token take() { return tokens_[at_++]; }

  void expect(Token::Kind k, const char* msg) {
    if (peek().kind != k) throw ParseError(msg, peek().pos);
    ++at_;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (peek().kind == Token::Or) {
      take();
      f = Formula::disj(f, parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (peek().kind == Token::And) {
      take();
      f = Formula::conj(f, parse_until());
    }
    return f;
  }

  Formula parse_until() {
    Formula f = parse_unary();
    if (peek().kind == Token::Until) {
      take();
      return Formula::until(f, parse_until()); // right-associative
    }
    return f;
  }

  Formula parse_unary() {
    switch (peek().kind) {
      case Token::Not: take(); return Formula::negation(parse_unary());
      case Token::Next: take(); return Formula::next(parse_unary());
      case Token::Ev: take(); return Formula::eventually(parse_unary());
      case Token::Alw: take(); return Formula::always(parse_unary());
      default: return parse_primary();
    }
  }

  Formula parse_primary() {
    Token t = take();
    switch (t.kind) {
      case Token::True: return Formula::tt();
      case Token::False: return Formula::ff();
      case Token::Atom: return Formula::atom(t.text);
      case Token::LParen: {
        Formula f = parse_or();
        expect(Token::RParen, "expected ')'");
        return f;
      }
      case Token::End: throw ParseError("unexpected end of input", t.pos);
      default: throw ParseError("unexpected token '" + t.text + "'", t.pos);
    }
  }

  std::vector<Token> tokens_;
  std::size_t at_ = 0;
};

} // namespace detail

inline Formula parse(const std::string& text) { return detail::Parser(text).run(); }

// ── Negation normal form ────────────────────────────────────────────────────
//
// Pushes negations down to atoms and eliminates F/G in favour of U and its
// dual R, so that downstream automaton construction only ever sees
// {true, false, (negated) atoms, &, |, X, U, R}.

inline Formula to_nnf(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return f;
    case Op::And: return Formula::conj(to_nnf(f.left()), to_nnf(f.right()));
    case Op::Or: return Formula::disj(to_nnf(f.left()), to_nnf(f.right()));
    case Op::Next: return Formula::next(to_nnf(f.left()));
    case Op::Until: return Formula::until(to_nnf(f.left()), to_nnf(f.right()));
    case Op::Release: return Formula::release(to_nnf(f.left()), to_nnf(f.right()));
    case Op::Eventually: return Formula::until(Formula::tt(), to_nnf(f.left()));
    case Op::Always: return Formula::release(Formula::ff(), to_nnf(f.left()));
    case Op::Not: {
      Formula g = f.left();
      switch (g.op()) {
        case Op::True: return Formula::ff();
        case Op::False: return Formula::tt();
        case Op::Atom: return f;
        case Op::Not: return to_nnf(g.left());
        case Op::And:
          return Formula::disj(to_nnf(Formula::negation(g.left())),
                               to_nnf(Formula::negation(g.right())));
        case Op::Or:
          return Formula::conj(to_nnf(Formula::negation(g.left())),
                               to_nnf(Formula::negation(g.right())));
        case Op::Next: return Formula::next(to_nnf(Formula::negation(g.left())));
        case Op::Until:
          return Formula::release(to_nnf(Formula::negation(g.left())),
                                  to_nnf(Formula::negation(g.right())));
        case Op::Release:
          return Formula::until(to_nnf(Formula::negation(g.left())),
                                to_nnf(Formula::negation(g.right())));
        case Op::Eventually: // !F g == G !g
          return Formula::release(Formula::ff(), to_nnf(Formula::negation(g.left())));
        case Op::Always: // !G g == F !g
          return Formula::until(Formula::tt(), to_nnf(Formula::negation(g.left())));
      }
      break;
    }
  }
  return f; // unreachable
}

// ── Lasso words and exact evaluation ────────────────────────────────────────

// One position of a word: the set of atoms that hold there.
using Letter = std::set<std::string>;

inline std::string to_string(const Letter& l) {
  std::string out = "{";
  bool first = true;
  for (const std::string& a : l) {
    if (!first) out += ",";
    out += a;
    first = false;
  }
  return out + "}";
}

// An ultimately periodic infinite word: prefix followed by the cycle forever.
struct LassoWord {
  std::vector<Letter> prefix;
  std::vector<Letter> cycle; // must be nonempty

  std::size_t positions() const { return prefix.size() + cycle.size(); }

  const Letter& at(std::size_t i) const {
    return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()];
  }
};

// Decides w |= f exactly.  Truth tables are computed for every subformula at
// every position of the prefix+cycle graph; until/release (and the derived
// F/G) are resolved by fixed-point iteration around the cycle, which matches
// the least/greatest fixed-point semantics on the infinite unrolling.
inline bool eval_lasso(const Formula& f, const LassoWord& w) {
  if (w.cycle.empty()) throw std::invalid_argument("lasso word must have a nonempty cycle");

  const std::size_t m = w.prefix.size();
  const std::size_t n = w.positions();
  auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : m; };

  std::vector<Formula> subs = f.subformulas();
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < subs.size(); ++k) index[subs[k].str()] = k;
  std::vector<std::vector<char>> val(subs.size(), std::vector<char>(n, 0));

  auto tab = [&](const Formula& g) -> std::vector<char>& { return val[index.at(g.str())]; };

  for (const Formula& g : subs) {
    std::vector<char>& v = tab(g);
    switch (g.op()) {
      case Op::True:
        std::fill(v.begin(), v.end(), 1);
        break;
      case Op::False:
        break;
      case Op::Atom:
        for (std::size_t i = 0; i < n; ++i) v[i] = w.at(i).count(g.name()) ? 1 : 0;
        break;
      case Op::Not: {
        const std::vector<char>& a = tab(g.left());
        for (std::size_t i = 0; i < n; ++i) v[i] = !a[i];
        break;
      }
      case Op::And: {
        const std::vector<char>& a = tab(g.left());
        const std::vector<char>& b = tab(g.right());
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] && b[i];
        break;
      }
      case Op::Or: {
        const std::vector<char>& a = tab(g.left());
        const std::vector<char>& b = tab(g.right());
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] || b[i];
        break;
      }
      case Op::Next: {
        const std::vector<char>& a = tab(g.left());
        for (std::size_t i = 0; i < n; ++i) v[i] = a[succ(i)];
        break;
      }
      case Op::Until:
      case Op::Eventually: {
        // Least fixed point of  v = b | (a & X v).  For F, a is constantly 1.
        const std::vector<char>* a = g.op() == Op::Until ? &tab(g.left()) : nullptr;
        const std::vector<char>& b = g.op() == Op::Until ? tab(g.right()) : tab(g.left());
        v = b;
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t r = n; r-- > 0;) {
            if (!v[r] && (a == nullptr || (*a)[r]) && v[succ(r)]) {
              v[r] = 1;
              changed = true;
            }
          }
        }
        break;
      }
      case Op::Release:
      case Op::Always: {
        // Greatest fixed point of  v = b & (a | X v).  For G, a is constantly 0.
        const std::vector<char>* a = g.op() == Op::Release ? &tab(g.left()) : nullptr;
        const std::vector<char>& b = g.op() == Op::Release ? tab(g.right()) : tab(g.left());
        v = b;
        for (bool changed = true; changed;) {
          changed = false;
          for (std::size_t r = n; r-- > 0;) {
            if (v[r] && !((a != nullptr && (*a)[r]) || v[succ(r)])) {
              v[r] = 0;
              changed = true;
            }
          }
        }
        break;
      }
    }
  }

  return tab(f)[0] != 0;
}

} // namespace ltlswarm
