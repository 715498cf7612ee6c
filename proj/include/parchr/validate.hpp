#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "parchr/engine.hpp"
#include "parchr/eval.hpp"
#include "parchr/program.hpp"
#include "parchr/store.hpp"
#include "parchr/syntax.hpp"

namespace parchr {

struct TraceCheck {
  bool ok = true;
  std::string diagnostic;
  explicit operator bool() const noexcept { return ok; }
};

namespace detail {

inline TraceCheck diverged(std::size_t index, const std::string& why) {
  return {false, "applied record " + std::to_string(index) + ": " + why};
}

inline std::vector<Term> sorted_terms(std::vector<Term> v) {
  std::sort(v.begin(), v.end(), TermLess{});
  return v;
}

// Evaluates ground arithmetic arguments, leaving anything with unbound
// variables for the caller to match.
inline Term evaluate_ground_arguments(const Term& t) {
  if (!t.is_compound()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args())
    args.push_back(is_arithmetic_operator(a) && a.is_ground() ? Term::number(eval_ground(a)) : a);
  return Term::compound(t.name(), std::move(args));
}

}  // namespace detail

/**
 * Replays a trace as a chain of single sequential rule applications on a
 * fresh store. Every record must find its constraints alive, its heads must
 * still match the stored terms, its guard must hold and its recorded body
 * constraints must be an instance of the rule body. The replayed final
 * multiset must equal the trace's final store.
 */
inline TraceCheck validate_trace(const Program& program, const Goal& goal, const Trace& trace) {
  if (detail::sorted_terms(goal.constraints) != detail::sorted_terms(trace.initial))
    return {false, "initial store is not a permutation of the goal"};
  if (!trace.permute_query && goal.constraints != trace.initial)
    return {false, "initial store differs from the unpermuted goal"};

  Store store;
  for (const auto& t : trace.initial) store.insert(t);

  for (std::size_t i = 0; i < trace.applied.size(); ++i) {
    const AppliedRecord& rec = trace.applied[i];
    const MatchInstance& inst = rec.instance;
    const Rule* rule = program.find_rule(inst.rule);
    if (!rule) return detail::diverged(i, "unknown rule " + inst.rule);
    if (inst.kept_ids.size() != rule->kept.size() || inst.removed_ids.size() != rule->removed.size())
      return detail::diverged(i, "head arity mismatch for rule " + rule->name);

    const auto ids = inst.ids();
    for (std::size_t a = 0; a < ids.size(); ++a) {
      if (!store.is_alive(ids[a])) return detail::diverged(i, "constraint #" + std::to_string(ids[a]) + " is dead");
      for (std::size_t b = a + 1; b < ids.size(); ++b)
        if (ids[a] == ids[b]) return detail::diverged(i, "constraint matched twice");
    }

    Binding env;
    for (std::size_t p = 0; p < ids.size(); ++p)
      if (!detail::match_into(rule->head(p), store.term(ids[p]), env))
        return detail::diverged(i, "head " + to_string(rule->head(p)) + " does not match " +
                                       to_string(store.term(ids[p])));
    try {
      for (const auto& g : rule->guard)
        if (!eval_guard_atom(substitute(g, env))) return detail::diverged(i, "guard " + to_string(g) + " fails");
    } catch (const EvalError& e) {
      return detail::diverged(i, std::string("guard error: ") + e.what());
    }

    for (ConstraintId id : inst.removed_ids) store.kill(id);

    std::size_t next_body = 0;
    try {
      for (const auto& atom : rule->body) {
        if (is_builtin(atom)) {
          env = eval_body_builtin(atom, std::move(env));
          continue;
        }
        if (next_body >= rec.inserted_terms.size()) return detail::diverged(i, "too few body constraints recorded");
        const Term expected = detail::evaluate_ground_arguments(substitute(atom, env));
        if (!detail::match_into(expected, rec.inserted_terms[next_body], env))
          return detail::diverged(i, "recorded body constraint " + to_string(rec.inserted_terms[next_body]) +
                                         " is not an instance of " + to_string(expected));
        ++next_body;
      }
    } catch (const EvalError& e) {
      return detail::diverged(i, std::string("body error: ") + e.what());
    }
    if (next_body != rec.inserted_terms.size()) return detail::diverged(i, "too many body constraints recorded");
    if (rec.inserted_ids.size() != rec.inserted_terms.size())
      return detail::diverged(i, "inserted ids and terms disagree");

    for (std::size_t b = 0; b < rec.inserted_terms.size(); ++b) {
      const ConstraintId id = store.insert(rec.inserted_terms[b]);
      if (id != rec.inserted_ids[b]) return detail::diverged(i, "body constraint got a different identity");
    }
  }

  if (detail::sorted_terms(store.alive_terms()) != detail::sorted_terms(trace.final_store))
    return {false, "replayed final store differs from the trace"};
  return {};
}

}  // namespace parchr
