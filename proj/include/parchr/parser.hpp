#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parchr/syntax.hpp"
#include "parchr/term.hpp"

namespace parchr {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

enum class TokenKind { integer, name, variable, punct, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  int line = 1;
  int column = 1;
  // true when no whitespace separates this token from the previous one
  bool glued = false;
};

// Longest match first.
inline constexpr std::string_view kPunctuation[] = {
    "<=>", "==>", "=:=", "=\\=", "\\=", "=<", ">=", "->", "//", "=", "<", ">", "+", "-", "*",
    "\\",  "|",   ",",   ".",    "@",   "(",  ")",  "[",  "]",
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  bool glued = false;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      glued = false;
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      glued = false;
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    tok.glued = glued;
    const auto uc = static_cast<unsigned char>(c);
    if (std::isdigit(uc)) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      tok.kind = TokenKind::integer;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isalpha(uc) || c == '_' || c == '$') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '$'))
        ++j;
      tok.text = std::string(src.substr(i, j - i));
      tok.kind = (std::isupper(uc) || c == '_') ? TokenKind::variable : TokenKind::name;
      advance(j - i);
    } else if (c == '\'') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == '\\' && j + 1 < src.size()) {
          text.push_back(src[j + 1]);
          j += 2;
        } else if (src[j] == '\'') {
          closed = true;
          ++j;
          break;
        } else {
          text.push_back(src[j++]);
        }
      }
      if (!closed) throw ParseError("unterminated quoted atom", line, col);
      tok.kind = TokenKind::name;
      tok.text = std::move(text);
      advance(j - i);
    } else {
      bool found = false;
      for (auto p : kPunctuation) {
        if (src.substr(i, p.size()) == p) {
          tok.kind = TokenKind::punct;
          tok.text = std::string(p);
          advance(p.size());
          found = true;
          break;
        }
      }
      if (!found) throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(tok));
    glued = true;
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

/**
 * Operator-precedence term reader over a token stream. Commas, bars and the
 * rule punctuation (`\`, `<=>`, `==>`, `.`) are not operators, so they end a
 * term; callers handle them.
 */
class TermReader {
 public:
  explicit TermReader(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[k];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokenKind::end; }

  bool accept(std::string_view punct) {
    if (peek().kind == TokenKind::punct && peek().text == punct) {
      next();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) fail("expected '" + std::string(punct) + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    const std::string found = t.kind == TokenKind::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(what + ", found " + found, t.line, t.column);
  }

  /// Starts a new variable scope (anonymous `_` numbering restarts per rule).
  void reset_scope() { anon_ = 0; }

  Term read_term(int max_prec = kMaxPrecedence) {
    const bool parenthesized = peek().kind == TokenKind::punct && peek().text == "(";
    Term left = read_primary(max_prec);
    int left_prec = parenthesized ? 0 : detail::term_precedence(left);
    for (;;) {
      const Token& t = peek();
      std::string_view op_name;
      if (t.kind == TokenKind::punct || (t.kind == TokenKind::name && t.text == "mod")) op_name = t.text;
      auto op = infix_operator(op_name);
      if (!op || op->precedence > max_prec) break;
      const int lmax = op->assoc == Assoc::yfx ? op->precedence : op->precedence - 1;
      if (left_prec > lmax) break;
      next();
      const int rmax = op->assoc == Assoc::xfy ? op->precedence : op->precedence - 1;
      Term right = read_term(rmax);
      left = Term::compound(std::string(op->name), {left, right});
      left_prec = op->precedence;
    }
    return left;
  }

 private:
  Term read_primary(int max_prec) {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::integer: {
        next();
        return Term::number(parse_integer(t));
      }
      case TokenKind::variable: {
        std::string name = next().text;
        if (name == "_") name = "_G" + std::to_string(++anon_);
        return Term::variable(std::move(name));
      }
      case TokenKind::name: {
        const Token& name_tok = next();
        std::string name = name_tok.text;
        if (peek().kind == TokenKind::punct && peek().text == "(" && peek().glued) {
          next();
          std::vector<Term> args;
          do {
            args.push_back(read_term(kMaxPrecedence));
          } while (accept(","));
          expect(")");
          return Term::compound(std::move(name), std::move(args));
        }
        return Term::symbol(std::move(name));
      }
      case TokenKind::punct:
        break;
      case TokenKind::end:
        fail("expected a term");
    }
    if (accept("(")) {
      Term inner = read_term(kMaxPrecedence);
      expect(")");
      return inner;
    }
    if (accept("[")) {
      if (accept("]")) return Term::nil();
      std::vector<Term> items;
      do {
        items.push_back(read_term(kMaxPrecedence));
      } while (accept(","));
      std::optional<Term> tail;
      if (accept("|")) tail = read_term(kMaxPrecedence);
      expect("]");
      return Term::list(items, tail);
    }
    if (peek().text == "-" && max_prec >= kPrefixMinus.precedence) {
      next();
      if (peek().kind == TokenKind::integer && peek().glued) {
        const Token& num = next();
        return Term::number(-parse_integer(num));
      }
      Term operand = read_term(kPrefixMinus.precedence);
      return Term::compound("-", {operand});
    }
    fail("expected a term");
  }

  static std::int64_t parse_integer(const Token& t) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(t.text, &used);
      return static_cast<std::int64_t>(v);
    } catch (const std::out_of_range&) {
      throw ParseError("integer literal out of range", t.line, t.column);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int anon_ = 0;
};

/// Parses a single standalone term (no trailing tokens allowed).
inline Term parse_term(std::string_view src) {
  TermReader reader(tokenize(src));
  Term t = reader.read_term();
  if (!reader.at_end()) reader.fail("unexpected trailing input");
  return t;
}

}  // namespace parchr
