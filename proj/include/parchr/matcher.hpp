#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "parchr/eval.hpp"
#include "parchr/program.hpp"
#include "parchr/store.hpp"
#include "parchr/term.hpp"

namespace parchr {

/// One applicable rule instance: a rule, the matched constraint ids and the head binding.
struct MatchInstance {
  std::uint64_t seq = 0;
  std::string rule;
  std::size_t rule_index = 0;
  std::vector<ConstraintId> kept_ids;
  std::vector<ConstraintId> removed_ids;
  Binding binding;
  /// rule(Name, [kept terms], [removed terms]); ordering key for pars/pard.
  Term sort_key;

  /// kept ids followed by removed ids, in head-position order.
  std::vector<ConstraintId> ids() const {
    std::vector<ConstraintId> out = kept_ids;
    out.insert(out.end(), removed_ids.begin(), removed_ids.end());
    return out;
  }

  bool all_alive(const Store& store) const {
    for (ConstraintId id : kept_ids)
      if (!store.is_alive(id)) return false;
    for (ConstraintId id : removed_ids)
      if (!store.is_alive(id)) return false;
    return true;
  }
};

/// Applicable instances in seq order.
using ConflictSet = std::vector<MatchInstance>;

inline Term make_sort_key(const Rule& rule, const Store& store, const std::vector<ConstraintId>& ids) {
  std::vector<Term> kept;
  std::vector<Term> removed;
  for (std::size_t i = 0; i < ids.size(); ++i)
    (i < rule.kept.size() ? kept : removed).push_back(store.term(ids[i]));
  return Term::compound("rule", {Term::symbol(rule.name), Term::list(kept), Term::list(removed)});
}

namespace detail {

// Head or guard term with its variables replaced by per-rule slot numbers.
struct Pattern {
  enum class Kind { constant, slot, compound };
  Kind kind = Kind::constant;
  Term constant;  // ground subterm, or the original term for compounds
  std::size_t slot = 0;
  std::vector<Pattern> args;
};

// Slot values point into store terms, which outlive a join.
using Slots = std::vector<const Term*>;

class SlotTable {
 public:
  std::size_t slot_of(const std::string& name) {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it != names_.end()) return static_cast<std::size_t>(it - names_.begin());
    names_.push_back(name);
    return names_.size() - 1;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

inline Pattern compile_pattern(const Term& t, SlotTable& table) {
  Pattern p;
  p.constant = t;
  if (t.is_ground()) return p;
  if (t.is_variable()) {
    p.kind = Pattern::Kind::slot;
    p.slot = table.slot_of(t.name());
    return p;
  }
  p.kind = Pattern::Kind::compound;
  for (const auto& a : t.args()) p.args.push_back(compile_pattern(a, table));
  return p;
}

inline void collect_slots(const Pattern& p, std::vector<std::size_t>& out) {
  if (p.kind == Pattern::Kind::slot) {
    if (std::find(out.begin(), out.end(), p.slot) == out.end()) out.push_back(p.slot);
  } else {
    for (const auto& a : p.args) collect_slots(a, out);
  }
}

inline bool match_slots(const Pattern& p, const Term& subject, Slots& slots, std::vector<std::size_t>& trail) {
  switch (p.kind) {
    case Pattern::Kind::constant:
      return p.constant == subject;
    case Pattern::Kind::slot:
      if (!slots[p.slot]) {
        slots[p.slot] = &subject;
        trail.push_back(p.slot);
        return true;
      }
      return *slots[p.slot] == subject;
    case Pattern::Kind::compound: {
      if (!subject.is_compound() || subject.arity() != p.args.size() || subject.name() != p.constant.name())
        return false;
      for (std::size_t i = 0; i < p.args.size(); ++i)
        if (!match_slots(p.args[i], subject.args()[i], slots, trail)) return false;
      return true;
    }
  }
  return false;
}

inline void undo(Slots& slots, std::vector<std::size_t>& trail, std::size_t mark) {
  while (trail.size() > mark) {
    slots[trail.back()] = nullptr;
    trail.pop_back();
  }
}

inline Term instantiate(const Pattern& p, const Slots& slots) {
  switch (p.kind) {
    case Pattern::Kind::constant:
      return p.constant;
    case Pattern::Kind::slot:
      return *slots[p.slot];
    case Pattern::Kind::compound: {
      std::vector<Term> args;
      args.reserve(p.args.size());
      for (const auto& a : p.args) args.push_back(instantiate(a, slots));
      return Term::compound(p.constant.name(), std::move(args));
    }
  }
  return p.constant;
}

inline std::int64_t eval_pattern(const Pattern& p, const Slots& slots) {
  switch (p.kind) {
    case Pattern::Kind::constant:
      return eval_ground(p.constant);
    case Pattern::Kind::slot:
      return eval_ground(*slots[p.slot]);
    case Pattern::Kind::compound:
      break;
  }
  if (!is_arithmetic_operator(p.constant)) return eval_ground(instantiate(p, slots));
  if (p.args.size() == 1) return negate(eval_pattern(p.args[0], slots));
  return apply_arithmetic(p.constant.name(), eval_pattern(p.args[0], slots), eval_pattern(p.args[1], slots));
}

// Same truth value and errors as eval_guard_atom on the instantiated atom.
inline bool eval_guard_pattern(const Pattern& g, const Slots& slots) {
  if (g.kind == Pattern::Kind::compound && g.args.size() == 2 && is_comparison(g.constant.name()))
    return compare_numbers(g.constant.name(), eval_pattern(g.args[0], slots), eval_pattern(g.args[1], slots));
  return eval_guard_atom(instantiate(g, slots));
}

// A rule prepared for repeated matching.
class CompiledRule {
 public:
  explicit CompiledRule(const Rule& rule) : rule_(&rule) {
    for (const auto& h : rule.heads()) {
      sigs_.push_back(Signature::of(h));
      heads_.push_back(compile_pattern(h, table_));
      std::vector<std::size_t> slots;
      collect_slots(heads_.back(), slots);
      head_slots_.push_back(std::move(slots));
    }
    for (const auto& g : rule.guard) {
      guards_.push_back(compile_pattern(g, table_));
      std::vector<std::size_t> slots;
      collect_slots(guards_.back(), slots);
      guard_slots_.push_back(std::move(slots));
    }
  }

  const Rule& rule() const { return *rule_; }

  struct Found {
    std::vector<ConstraintId> ids;
    Binding binding;
  };

  // Semi-naive: the pivot is the first position holding a new id, so every
  // tuple with at least one new id is produced exactly once.
  std::vector<Found> join(const Store& store, const std::vector<ConstraintId>& new_ids) const {
    Join j{*this, store, new_ids};
    const std::size_t h = heads_.size();
    for (std::size_t pivot = 0; pivot < h; ++pivot) {
      j.pivot = pivot;
      for (ConstraintId id : new_ids) {
        const Term& t = store.term(id);
        if (t.arity() != sigs_[pivot].arity || t.name() != sigs_[pivot].functor) continue;
        if (!match_slots(heads_[pivot], store.term(id), j.slots, j.trail)) {
          undo(j.slots, j.trail, 0);
          continue;
        }
        j.chosen[pivot] = id;
        j.extend();
        j.chosen[pivot] = 0;
        undo(j.slots, j.trail, 0);
      }
    }
    std::sort(j.out.begin(), j.out.end(), [](const Found& a, const Found& b) { return a.ids < b.ids; });
    return std::move(j.out);
  }

 private:
  struct Join {
    Join(const CompiledRule& r, const Store& s, const std::vector<ConstraintId>& n)
        : rule(r), store(s), new_ids(n), slots(r.table_.names().size(), nullptr), chosen(r.heads_.size(), 0),
          guard_done(r.guards_.size(), 0) {
      for (const auto& sig : r.sigs_) candidates.push_back(&s.alive_by_signature(sig));
    }

    const CompiledRule& rule;
    const Store& store;
    const std::vector<ConstraintId>& new_ids;  // sorted
    Slots slots;
    std::vector<std::size_t> trail;
    std::vector<ConstraintId> chosen;
    std::vector<char> guard_done;
    std::vector<std::size_t> guard_stack;
    std::vector<const std::vector<ConstraintId>*> candidates;  // alive ids per head position
    std::size_t pivot = 0;
    std::vector<Found> out;

    bool fresh(ConstraintId id) const { return std::binary_search(new_ids.begin(), new_ids.end(), id); }

    bool bound(const std::vector<std::size_t>& s) const {
      return std::all_of(s.begin(), s.end(), [&](std::size_t i) { return slots[i] != nullptr; });
    }

    void extend() {
      // guards are checked as soon as their variables are bound
      const std::size_t guard_mark = guard_stack.size();
      bool ok = true;
      for (std::size_t g = 0; g < rule.guards_.size(); ++g) {
        if (guard_done[g] || !bound(rule.guard_slots_[g])) continue;
        guard_done[g] = 1;
        guard_stack.push_back(g);
        if (!eval_guard_pattern(rule.guards_[g], slots)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        const std::size_t next = pick_position();
        if (next == chosen.size()) {
          emit();
        } else {
          for (ConstraintId id : *candidates[next]) {
            if (next < pivot && fresh(id)) continue;
            if (std::find(chosen.begin(), chosen.end(), id) != chosen.end()) continue;
            const std::size_t mark = trail.size();
            if (match_slots(rule.heads_[next], store.term(id), slots, trail)) {
              chosen[next] = id;
              extend();
              chosen[next] = 0;
            }
            undo(slots, trail, mark);
          }
        }
      }
      while (guard_stack.size() > guard_mark) {
        guard_done[guard_stack.back()] = 0;
        guard_stack.pop_back();
      }
    }

    void emit() {
      Found f;
      f.ids = chosen;
      const auto& names = rule.table_.names();
      for (std::size_t i = 0; i < names.size(); ++i)
        if (slots[i]) f.binding.bind(names[i], *slots[i]);
      out.push_back(std::move(f));
    }

    // Unfilled position with the most already-bound variables; ties go to the
    // smaller candidate list, then the lower position.
    std::size_t pick_position() const {
      std::size_t best = chosen.size();
      std::size_t best_bound = 0;
      std::size_t best_count = 0;
      for (std::size_t q = 0; q < chosen.size(); ++q) {
        if (chosen[q] != 0) continue;
        std::size_t nbound = 0;
        for (std::size_t s : rule.head_slots_[q]) nbound += slots[s] ? 1 : 0;
        const std::size_t count = candidates[q]->size();
        if (best == chosen.size() || nbound > best_bound || (nbound == best_bound && count < best_count)) {
          best = q;
          best_bound = nbound;
          best_count = count;
        }
      }
      return best;
    }
  };

  const Rule* rule_;
  SlotTable table_;
  std::vector<Signature> sigs_;
  std::vector<Pattern> heads_;
  std::vector<std::vector<std::size_t>> head_slots_;
  std::vector<Pattern> guards_;
  std::vector<std::vector<std::size_t>> guard_slots_;
};

}  // namespace detail

/**
 * Incremental head matcher for one program. Rules are compiled once; the
 * program must outlive the matcher.
 */
class Matcher {
 public:
  explicit Matcher(const Program& program) : program_(&program) {
    for (const auto& r : program.rules) rules_.emplace_back(r);
  }

  /**
   * All rule instances whose heads match pairwise distinct alive
   * constraints, with at least one constraint from `new_ids`, whose guard
   * holds and whose (rule, id tuple) is not yet in the propagation history.
   * Found instances are recorded in the history and numbered from
   * `next_seq`. Sort keys are left at their default unless requested.
   *
   * Order: rules in program order, then id tuples lexicographically (head
   * positions left to right, ids ascending).
   */
  std::vector<MatchInstance> enumerate(Store& store, std::vector<ConstraintId> new_ids, std::uint64_t& next_seq,
                                       bool with_sort_keys = true) const {
    std::erase_if(new_ids, [&](ConstraintId id) { return !store.is_alive(id); });
    std::sort(new_ids.begin(), new_ids.end());
    std::vector<MatchInstance> out;
    if (new_ids.empty()) return out;
    for (std::size_t ri = 0; ri < rules_.size(); ++ri) {
      const Rule& rule = rules_[ri].rule();
      for (auto& found : rules_[ri].join(store, new_ids)) {
        if (store.history_check_and_add(rule.name, found.ids) == HistoryStatus::seen) continue;
        MatchInstance inst;
        inst.seq = next_seq++;
        inst.rule = rule.name;
        inst.rule_index = ri;
        const auto split = found.ids.begin() + static_cast<std::ptrdiff_t>(rule.kept.size());
        inst.kept_ids.assign(found.ids.begin(), split);
        inst.removed_ids.assign(split, found.ids.end());
        if (with_sort_keys) inst.sort_key = make_sort_key(rule, store, found.ids);
        inst.binding = std::move(found.binding);
        out.push_back(std::move(inst));
      }
    }
    return out;
  }

  const Program& program() const { return *program_; }

 private:
  const Program* program_;
  std::vector<detail::CompiledRule> rules_;
};

inline std::vector<MatchInstance> enumerate_matchings(const Program& program, Store& store,
                                                      const std::vector<ConstraintId>& new_ids,
                                                      std::uint64_t& next_seq) {
  return Matcher(program).enumerate(store, new_ids, next_seq);
}

inline std::vector<MatchInstance> enumerate_matchings(const Program& program, Store& store,
                                                      const std::vector<ConstraintId>& new_ids) {
  std::uint64_t seq = 1;
  return enumerate_matchings(program, store, new_ids, seq);
}

/// Drops entries that reference a dead constraint; keeps seq order.
inline ConflictSet prune_dead(ConflictSet cs, const Store& store) {
  std::erase_if(cs, [&](const MatchInstance& m) { return !m.all_alive(store); });
  return cs;
}

/// Per rule: product over head positions of the alive count of that position's signature.
inline std::vector<std::uint64_t> count_head_matchings_bound(const Program& program, const Store& store) {
  std::vector<std::uint64_t> out;
  out.reserve(program.rules.size());
  for (const auto& rule : program.rules) {
    std::uint64_t product = 1;
    for (std::size_t p = 0; p < rule.head_count(); ++p)
      product *= store.alive_by_signature(Signature::of(rule.head(p))).size();
    out.push_back(product);
  }
  return out;
}

}  // namespace parchr
