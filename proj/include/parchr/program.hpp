#pragma once

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parchr/eval.hpp"
#include "parchr/parser.hpp"
#include "parchr/syntax.hpp"
#include "parchr/term.hpp"

namespace parchr {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AtomClass { builtin_atom, chr_constraint };

/// Built-ins are evaluated, never stored; everything else is a CHR constraint.
inline AtomClass classify_builtin(const Term& t) {
  if (t.is_symbol()) return t.name() == "true" ? AtomClass::builtin_atom : AtomClass::chr_constraint;
  if (!t.is_compound()) return AtomClass::chr_constraint;
  const auto& f = t.name();
  switch (t.arity()) {
    case 2:
      if (f == "=<" || f == "<" || f == ">" || f == ">=" || f == "=:=" || f == "=\\=" || f == "=" ||
          f == "\\=" || f == "member" || f == "neg")
        return AtomClass::builtin_atom;
      break;
    case 3:
      if (f == "and" || f == "or") return AtomClass::builtin_atom;
      break;
    default:
      break;
  }
  return AtomClass::chr_constraint;
}

inline bool is_builtin(const Term& t) { return classify_builtin(t) == AtomClass::builtin_atom; }

/// Functor/arity pair identifying a constraint kind.
struct Signature {
  std::string functor;
  std::size_t arity = 0;

  static Signature of(const Term& t) { return {t.name(), t.arity()}; }

  friend auto operator<=>(const Signature&, const Signature&) = default;
};

/// `name @ kept \ removed <=> guard | body.`
struct Rule {
  std::string name;
  std::vector<Term> kept;
  std::vector<Term> removed;
  std::vector<Term> guard;
  std::vector<Term> body;

  /// kept heads followed by removed heads, in head-position order.
  std::vector<Term> heads() const {
    std::vector<Term> out = kept;
    out.insert(out.end(), removed.begin(), removed.end());
    return out;
  }
  std::size_t head_count() const { return kept.size() + removed.size(); }
  const Term& head(std::size_t position) const {
    return position < kept.size() ? kept[position] : removed[position - kept.size()];
  }
  bool is_propagation() const { return removed.empty(); }

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Program {
  std::vector<Rule> rules;
  std::set<Signature> constraint_signatures;

  const Rule* find_rule(std::string_view name) const {
    for (const auto& r : rules)
      if (r.name == name) return &r;
    return nullptr;
  }
  std::size_t rule_index(std::string_view name) const {
    for (std::size_t i = 0; i < rules.size(); ++i)
      if (rules[i].name == name) return i;
    throw std::out_of_range("no rule named " + std::string(name));
  }

  friend bool operator==(const Program&, const Program&) = default;
};

/// Initial constraints of a run; always ground.
struct Goal {
  std::vector<Term> constraints;

  friend bool operator==(const Goal&, const Goal&) = default;
};

/// Checks the structural invariants of a rule; throws ValidationError.
inline void validate_rule(const Rule& r) {
  if (r.kept.empty() && r.removed.empty())
    throw ValidationError("rule " + r.name + ": at least one head constraint is required");
  std::vector<std::string> head_vars;
  for (const auto& h : r.heads()) {
    if (!(h.is_compound() || h.is_symbol()))
      throw ValidationError("rule " + r.name + ": head " + to_string(h) + " is not a constraint");
    if (is_builtin(h))
      throw ValidationError("rule " + r.name + ": built-in " + to_string(h) + " cannot occur in a head");
    collect_variables(h, head_vars);
  }
  for (const auto& g : r.guard) {
    if (!is_builtin(g))
      throw ValidationError("rule " + r.name + ": guard " + to_string(g) + " is not a built-in");
    std::vector<std::string> vars;
    collect_variables(g, vars);
    for (const auto& v : vars)
      if (std::find(head_vars.begin(), head_vars.end(), v) == head_vars.end())
        throw ValidationError("rule " + r.name + ": guard variable " + v + " does not occur in the head");
  }
}

inline void validate_program(const Program& p) {
  std::set<std::string> names;
  for (const auto& r : p.rules) {
    validate_rule(r);
    if (!names.insert(r.name).second) throw ValidationError("duplicate rule name " + r.name);
  }
}

namespace detail {

inline std::vector<Term> read_term_list(TermReader& reader) {
  std::vector<Term> out;
  do {
    out.push_back(reader.read_term());
  } while (reader.accept(","));
  return out;
}

inline std::vector<Term> drop_true(std::vector<Term> terms) {
  std::erase_if(terms, [](const Term& t) { return t.is_symbol() && t.name() == "true"; });
  return terms;
}

inline void write_term_list(std::ostream& os, const std::vector<Term>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) os << ", ";
    os << terms[i];
  }
}

}  // namespace detail

/**
 * Parses CHR source text into a validated Program.
 *
 *   rule      := [ name "@" ] heads ( "<=>" | "==>" ) [ guard "|" ] body "."
 *   heads     := constraints [ "\" constraints ]      ("\" only with "<=>")
 *
 * A body of `true` is the empty body. Unnamed rules are called r1, r2, ...
 * in textual order, skipping names that are already taken.
 */
inline Program parse_program(std::string_view source) {
  TermReader reader(tokenize(source));
  Program program;
  std::vector<bool> named;

  while (!reader.at_end()) {
    reader.reset_scope();
    Rule rule;
    const Token& first = reader.peek();
    const Token& second = reader.peek(1);
    const bool has_name = (first.kind == TokenKind::name || first.kind == TokenKind::integer) &&
                          second.kind == TokenKind::punct && second.text == "@";
    if (has_name) {
      rule.name = reader.next().text;
      reader.next();
    }

    std::vector<Term> first_heads = detail::read_term_list(reader);
    bool simpagation = false;
    std::vector<Term> second_heads;
    if (reader.accept("\\")) {
      simpagation = true;
      second_heads = detail::read_term_list(reader);
    }
    const Token arrow = reader.peek();
    if (reader.accept("<=>")) {
      if (simpagation) {
        rule.kept = std::move(first_heads);
        rule.removed = std::move(second_heads);
      } else {
        rule.removed = std::move(first_heads);
      }
    } else if (reader.accept("==>")) {
      if (simpagation) throw ParseError("'\\' is only allowed in '<=>' rules", arrow.line, arrow.column);
      rule.kept = std::move(first_heads);
    } else {
      reader.fail("expected '<=>' or '==>'");
    }

    if (reader.peek().kind == TokenKind::punct && reader.peek().text == ".")
      reader.fail("empty rule body");
    std::vector<Term> part = detail::read_term_list(reader);
    if (reader.accept("|")) {
      rule.guard = detail::drop_true(std::move(part));
      if (reader.peek().kind == TokenKind::punct && reader.peek().text == ".")
        reader.fail("empty rule body");
      part = detail::read_term_list(reader);
    }
    rule.body = detail::drop_true(std::move(part));
    reader.expect(".");

    named.push_back(has_name);
    program.rules.push_back(std::move(rule));
  }

  std::set<std::string> taken;
  for (std::size_t i = 0; i < program.rules.size(); ++i)
    if (named[i]) taken.insert(program.rules[i].name);
  int counter = 0;
  for (std::size_t i = 0; i < program.rules.size(); ++i) {
    if (named[i]) continue;
    std::string name;
    do {
      name = "r" + std::to_string(++counter);
    } while (taken.count(name));
    taken.insert(name);
    program.rules[i].name = name;
  }

  for (const auto& r : program.rules)
    for (const auto& h : r.heads())
      if (h.is_compound() || h.is_symbol()) program.constraint_signatures.insert(Signature::of(h));

  validate_program(program);
  return program;
}

/// Parses a comma-separated list of ground constraints; arithmetic arguments are evaluated.
inline Goal parse_query(std::string_view source) {
  TermReader reader(tokenize(source));
  Goal goal;
  if (reader.at_end()) return goal;
  for (const auto& t : detail::read_term_list(reader)) {
    if (!t.is_ground()) throw EvalError("query constraint is not ground: " + to_string(t));
    if (!(t.is_compound() || t.is_symbol()) || is_builtin(t))
      throw EvalError("query element is not a CHR constraint: " + to_string(t));
    goal.constraints.push_back(evaluate_arguments(t));
  }
  reader.accept(".");
  if (!reader.at_end()) reader.fail("expected ',' or end of query");
  return goal;
}

inline std::string to_string(const Rule& r) {
  std::ostringstream os;
  if (detail::is_plain_atom(r.name) || detail::is_integer_text(r.name)) {
    os << r.name;
  } else {
    detail::write_atom(os, r.name);
  }
  os << " @ ";
  if (r.removed.empty()) {
    detail::write_term_list(os, r.kept);
    os << " ==> ";
  } else {
    if (!r.kept.empty()) {
      detail::write_term_list(os, r.kept);
      os << " \\ ";
    }
    detail::write_term_list(os, r.removed);
    os << " <=> ";
  }
  if (!r.guard.empty()) {
    detail::write_term_list(os, r.guard);
    os << " | ";
  }
  if (r.body.empty()) {
    os << "true";
  } else {
    detail::write_term_list(os, r.body);
  }
  os << '.';
  return os.str();
}

inline std::string to_string(const Program& p) {
  std::string out;
  for (const auto& r : p.rules) out += to_string(r) + "\n";
  return out;
}

}  // namespace parchr
