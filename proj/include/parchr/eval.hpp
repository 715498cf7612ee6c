#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "parchr/syntax.hpp"
#include "parchr/term.hpp"

namespace parchr {

/// Raised for ill-typed, non-ground or otherwise unevaluable built-ins.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_arithmetic_operator(const Term& t) {
  if (!t.is_compound()) return false;
  const auto& f = t.name();
  if (t.arity() == 1) return f == "-";
  if (t.arity() == 2) return f == "+" || f == "-" || f == "*" || f == "//" || f == "mod";
  return false;
}

/// Binary arithmetic on evaluated operands; `f` is one of + - * // mod.
inline std::int64_t apply_arithmetic(std::string_view f, std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (f == "+") {
    if (__builtin_add_overflow(a, b, &out)) throw EvalError("integer overflow");
  } else if (f == "-") {
    if (__builtin_sub_overflow(a, b, &out)) throw EvalError("integer overflow");
  } else if (f == "*") {
    if (__builtin_mul_overflow(a, b, &out)) throw EvalError("integer overflow");
  } else if (f == "//") {
    if (b == 0) throw EvalError("division by zero");
    if (a == INT64_MIN && b == -1) throw EvalError("integer overflow");
    out = a / b;
  } else if (f == "mod") {
    if (b <= 0) throw EvalError("mod requires a positive divisor, got " + std::to_string(b));
    out = ((a % b) + b) % b;
  } else {
    throw EvalError("unknown arithmetic operator " + std::string(f));
  }
  return out;
}

inline std::int64_t negate(std::int64_t v) {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(std::int64_t{0}, v, &out)) throw EvalError("integer overflow");
  return out;
}

/**
 * Evaluates a ground integer expression built from +, -, *, // (truncating),
 * mod and unary minus. `mod` requires a positive right operand and yields
 * the non-negative remainder. Overflow is reported as an EvalError.
 */
inline std::int64_t eval_ground(const Term& expr) {
  if (expr.is_number()) return expr.value();
  if (!expr.is_ground()) throw EvalError("arithmetic on non-ground term " + to_string(expr));
  if (!is_arithmetic_operator(expr)) throw EvalError("not an arithmetic expression: " + to_string(expr));
  if (expr.arity() == 1) return negate(eval_ground(expr.args()[0]));
  return apply_arithmetic(expr.name(), eval_ground(expr.args()[0]), eval_ground(expr.args()[1]));
}

/**
 * Evaluates top-level argument expressions of a CHR constraint. Arguments
 * whose principal functor is arithmetic are reduced to numbers; everything
 * else passes through untouched.
 */
inline Term evaluate_arguments(const Term& constraint) {
  if (!constraint.is_compound()) return constraint;
  bool changed = false;
  std::vector<Term> args;
  args.reserve(constraint.arity());
  for (const auto& a : constraint.args()) {
    if (is_arithmetic_operator(a)) {
      args.push_back(Term::number(eval_ground(a)));
      changed = true;
    } else {
      args.push_back(a);
    }
  }
  return changed ? Term::compound(constraint.name(), std::move(args)) : constraint;
}

namespace detail {

inline bool is_comparison(std::string_view f) {
  return f == "=<" || f == "<" || f == ">" || f == ">=" || f == "=:=" || f == "=\\=";
}

inline bool compare_numbers(std::string_view f, std::int64_t a, std::int64_t b) {
  if (f == "=<") return a <= b;
  if (f == "<") return a < b;
  if (f == ">") return a > b;
  if (f == ">=") return a >= b;
  if (f == "=:=") return a == b;
  return a != b;
}

inline bool list_contains(const Term& list, const Term& item) {
  Term cur = list;
  while (cur.is_cons()) {
    if (cur.args()[0] == item) return true;
    cur = cur.args()[1];
  }
  if (!cur.is_nil()) throw EvalError("member/2 expects a proper list, got " + to_string(list));
  return false;
}

inline const Term& truth_symbol(bool v) {
  static const Term t = Term::symbol("true");
  static const Term f = Term::symbol("false");
  return v ? t : f;
}

inline bool truth_value(const Term& t) {
  if (t.is_symbol() && t.name() == "true") return true;
  if (t.is_symbol() && t.name() == "false") return false;
  throw EvalError("expected true or false, got " + to_string(t));
}

}  // namespace detail

/// Truth value of a ground guard atom.
inline bool eval_guard_atom(const Term& g) {
  if (!g.is_ground()) throw EvalError("guard atom is not ground: " + to_string(g));
  if (g.is_symbol() && g.name() == "true") return true;
  if (g.is_compound() && g.arity() == 2) {
    const auto& f = g.name();
    const auto& lhs = g.args()[0];
    const auto& rhs = g.args()[1];
    if (detail::is_comparison(f)) return detail::compare_numbers(f, eval_ground(lhs), eval_ground(rhs));
    if (f == "=") return lhs == rhs;
    if (f == "\\=") return lhs != rhs;
    if (f == "member") return detail::list_contains(rhs, lhs);
  }
  throw EvalError("unknown guard predicate: " + to_string(g));
}

/**
 * Executes a built-in body atom under `env`. The boolean tables neg/2,
 * and/3 and or/3 bind (or check) their last argument; any guard-atom form
 * must hold. Returns the extended environment.
 */
inline Binding eval_body_builtin(const Term& b, Binding env) {
  const bool boolean_op = b.is_compound() && ((b.name() == "neg" && b.arity() == 2) ||
                                              ((b.name() == "and" || b.name() == "or") && b.arity() == 3));
  if (!boolean_op) {
    const Term g = substitute(b, env);
    if (!eval_guard_atom(g)) throw EvalError("body built-in failed: " + to_string(g));
    return env;
  }

  const std::size_t n_in = b.arity() - 1;
  bool inputs[2] = {false, false};
  for (std::size_t i = 0; i < n_in; ++i) {
    const Term in = substitute(b.args()[i], env);
    if (!in.is_ground()) throw EvalError("unbound input in " + to_string(substitute(b, env)));
    inputs[i] = detail::truth_value(in);
  }
  bool result = false;
  if (b.name() == "neg") {
    result = !inputs[0];
  } else if (b.name() == "and") {
    result = inputs[0] && inputs[1];
  } else {
    result = inputs[0] || inputs[1];
  }

  const Term out = substitute(b.args()[n_in], env);
  const Term& value = detail::truth_symbol(result);
  if (out.is_variable()) {
    env.bind(out.name(), value);
  } else if (out != value) {
    throw EvalError("body built-in failed: " + to_string(substitute(b, env)));
  }
  return env;
}

}  // namespace parchr
