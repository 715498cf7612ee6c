#pragma once

#include <cctype>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "parchr/term.hpp"

namespace parchr {

// Operator table shared by the parser and the printer.
enum class Assoc { xfx, xfy, yfx, fy };

struct OperatorInfo {
  std::string_view name;
  int precedence;
  Assoc assoc;
};

inline constexpr OperatorInfo kInfixOperators[] = {
    {"->", 1050, Assoc::xfy},
    {"=<", 700, Assoc::xfx},  {"<", 700, Assoc::xfx},   {">", 700, Assoc::xfx},  {">=", 700, Assoc::xfx},
    {"=:=", 700, Assoc::xfx}, {"=\\=", 700, Assoc::xfx}, {"=", 700, Assoc::xfx},  {"\\=", 700, Assoc::xfx},
    {"+", 500, Assoc::yfx},   {"-", 500, Assoc::yfx},
    {"*", 400, Assoc::yfx},   {"//", 400, Assoc::yfx},   {"mod", 400, Assoc::yfx},
};

inline constexpr OperatorInfo kPrefixMinus{"-", 200, Assoc::fy};
inline constexpr int kMaxPrecedence = 1200;

inline std::optional<OperatorInfo> infix_operator(std::string_view name) {
  for (const auto& op : kInfixOperators)
    if (op.name == name) return op;
  return std::nullopt;
}

namespace detail {

inline bool is_plain_atom(std::string_view s) {
  if (s.empty()) return false;
  if (s == "[]") return true;
  const unsigned char first = static_cast<unsigned char>(s[0]);
  if (!(std::islower(first) || first == '$')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) return false;
  return true;
}

inline bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline void write_atom(std::ostream& os, std::string_view s) {
  if (is_plain_atom(s)) {
    os << s;
    return;
  }
  os << '\'';
  for (char c : s) {
    if (c == '\'' || c == '\\') os << '\\';
    os << c;
  }
  os << '\'';
}

inline int term_precedence(const Term& t) {
  if (t.is_number() && t.value() < 0) return kPrefixMinus.precedence;
  if (!t.is_compound()) return 0;
  if (t.arity() == 2)
    if (auto op = infix_operator(t.name())) return op->precedence;
  if (t.arity() == 1 && t.name() == "-") return kPrefixMinus.precedence;
  return 0;
}

void write_term(std::ostream& os, const Term& t, int max_prec);

inline void write_operand(std::ostream& os, const Term& t, int max_prec) {
  if (term_precedence(t) > max_prec) {
    os << '(';
    write_term(os, t, kMaxPrecedence);
    os << ')';
  } else {
    write_term(os, t, max_prec);
  }
}

inline void write_term(std::ostream& os, const Term& t, int max_prec) {
  switch (t.kind()) {
    case Term::Kind::number:
      os << t.value();
      return;
    case Term::Kind::variable:
      os << t.name();
      return;
    case Term::Kind::symbol:
      write_atom(os, t.name());
      return;
    case Term::Kind::compound:
      break;
  }
  if (t.is_cons()) {
    os << '[';
    write_term(os, t.args()[0], kMaxPrecedence);
    Term rest = t.args()[1];
    while (rest.is_cons()) {
      os << ',';
      write_term(os, rest.args()[0], kMaxPrecedence);
      rest = rest.args()[1];
    }
    if (!rest.is_nil()) {
      os << '|';
      write_term(os, rest, kMaxPrecedence);
    }
    os << ']';
    return;
  }
  if (t.arity() == 2) {
    if (auto op = infix_operator(t.name())) {
      const int lp = op->assoc == Assoc::yfx ? op->precedence : op->precedence - 1;
      const int rp = op->assoc == Assoc::xfy ? op->precedence : op->precedence - 1;
      std::ostringstream rhs;
      write_operand(rhs, t.args()[1], rp);
      write_operand(os, t.args()[0], lp);
      const std::string r = rhs.str();
      if (op->name == "mod") {
        os << " mod " << r;
      } else {
        os << op->name;
        // keep "1- -2" and "a= \\=" from fusing into a different token
        if (!r.empty() && (r[0] == '-' || r[0] == '=' || r[0] == '<' || r[0] == '>' || r[0] == '\\' ||
                           r[0] == '*' || r[0] == '+' || r[0] == '/'))
          os << ' ';
        os << r;
      }
      return;
    }
  }
  if (t.arity() == 1 && t.name() == "-") {
    os << "-(";
    write_term(os, t.args()[0], kMaxPrecedence);
    os << ')';
    return;
  }
  write_atom(os, t.name());
  os << '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) os << ',';
    write_term(os, t.args()[i], kMaxPrecedence);
  }
  os << ')';
}

}  // namespace detail

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  detail::write_term(os, t, kMaxPrecedence);
  return os;
}

inline std::string to_string(const Term& t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

inline std::string to_string(const Binding& b) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [name, value] : b) {
    if (!first) os << ", ";
    first = false;
    os << name << "=" << value;
  }
  os << '}';
  return os.str();
}

}  // namespace parchr
