#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parchr/eval.hpp"
#include "parchr/matcher.hpp"
#include "parchr/metrics.hpp"
#include "parchr/program.hpp"
#include "parchr/rng.hpp"
#include "parchr/store.hpp"
#include "parchr/term.hpp"

namespace parchr {

/// Order in which a step offers conflict-set entries to the processors.
enum class Strategy { par, pars, pard, parr };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::par: return "par";
    case Strategy::pars: return "pars";
    case Strategy::pard: return "pard";
    case Strategy::parr: return "parr";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "par") return Strategy::par;
  if (s == "pars") return Strategy::pars;
  if (s == "pard") return Strategy::pard;
  if (s == "parr") return Strategy::parr;
  return std::nullopt;
}

inline constexpr Strategy kAllStrategies[] = {Strategy::par, Strategy::pars, Strategy::pard, Strategy::parr};

/// Processor model: unbounded, or at most `k` rule applications per step.
class Processors {
 public:
  static Processors unbounded() { return Processors{}; }
  static Processors bounded(std::size_t k) {
    if (k == 0) throw std::invalid_argument("processor bound must be at least 1");
    Processors p;
    p.bound_ = k;
    return p;
  }

  bool is_unbounded() const noexcept { return !bound_; }
  std::size_t limit() const noexcept { return bound_.value_or(std::numeric_limits<std::size_t>::max()); }
  std::string label() const { return bound_ ? std::to_string(*bound_) : "unbounded"; }

  friend bool operator==(const Processors&, const Processors&) = default;

 private:
  std::optional<std::size_t> bound_;
};

struct RunConfig {
  std::shared_ptr<const Program> program;
  Goal goal;
  Strategy strategy = Strategy::par;
  Processors processors = Processors::unbounded();
  std::uint64_t seed = 0;
  bool permute_query = true;
  std::size_t max_steps = 10000;
  /// When false, stale entries stay in the conflict set and still take processor slots.
  bool prune_stale = true;
};

struct AppliedRecord {
  std::size_t step = 0;
  MatchInstance instance;
  std::vector<ConstraintId> inserted_ids;
  std::vector<Term> inserted_terms;
};

struct Trace {
  Strategy strategy = Strategy::par;
  Processors processors;
  std::uint64_t seed = 0;
  bool permute_query = true;
  std::size_t max_steps = 0;
  bool prune_stale = true;

  /// Goal constraints in insertion order (after the optional permutation).
  std::vector<Term> initial;
  std::vector<StepMetrics> steps;
  std::vector<AppliedRecord> applied;
  /// Alive constraints at the end of the run, in id order.
  std::vector<Term> final_store;

  std::size_t total_steps() const { return steps.size(); }
  std::size_t counted_steps() const {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const StepMetrics& m) { return !m.gc; }));
  }
};

class StepLimitExceeded : public std::runtime_error {
 public:
  explicit StepLimitExceeded(Trace partial)
      : std::runtime_error("step limit of " + std::to_string(partial.max_steps) + " reached"),
        trace_(std::move(partial)) {}
  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

/**
 * Orders alive entries for one step. par keeps discovery (seq) order, pars
 * sorts by (sort key, seq), pard is the exact reverse of pars and parr is a
 * uniform shuffle drawn from `rng`.
 */
inline ConflictSet order_conflict_set(ConflictSet entries, Strategy strategy, Rng& rng) {
  auto by_key = [](const MatchInstance& a, const MatchInstance& b) {
    const auto c = compare_terms(a.sort_key, b.sort_key);
    if (c != 0) return c < 0;
    return a.seq < b.seq;
  };
  switch (strategy) {
    case Strategy::par:
      break;
    case Strategy::pars:
      std::sort(entries.begin(), entries.end(), by_key);
      break;
    case Strategy::pard:
      std::sort(entries.begin(), entries.end(), by_key);
      std::reverse(entries.begin(), entries.end());
      break;
    case Strategy::parr:
      rng.shuffle(entries);
      break;
  }
  return entries;
}

/// Replaces an ordering strategy, e.g. to inject a faulty scheduler in tests.
using OrderFn = std::function<ConflictSet(ConflictSet, Strategy, Rng&)>;

enum class ApplyOutcome { applied, stale };

/**
 * Fires one instance against the store. Removed heads die immediately; the
 * body runs left to right, built-ins extending the binding and CHR
 * constraints (arguments evaluated) going to `insert_buffer` for the end of
 * the step. Body variables that are still unbound when a CHR constraint
 * needs them become fresh symbols $g1, $g2, ...
 */
inline ApplyOutcome apply_instance(Store& store, const Program& program, const MatchInstance& inst,
                                   std::uint64_t& fresh_counter, std::vector<Term>& insert_buffer) {
  if (!inst.all_alive(store)) return ApplyOutcome::stale;
  const Rule& rule = program.rules.at(inst.rule_index);
  for (ConstraintId id : inst.removed_ids) store.kill(id);

  Binding env = inst.binding;
  for (const auto& atom : rule.body) {
    if (is_builtin(atom)) {
      env = eval_body_builtin(atom, std::move(env));
      continue;
    }
    std::vector<std::string> vars;
    collect_variables(atom, vars);
    for (const auto& v : vars)
      if (!env.contains(v)) env.bind(v, Term::symbol("$g" + std::to_string(++fresh_counter)));
    insert_buffer.push_back(evaluate_arguments(substitute(atom, env)));
  }
  return ApplyOutcome::applied;
}

/**
 * Sequential simulation of parallel rule application for one run.
 *
 * Each step prunes stale entries from the persistent conflict set, orders
 * the rest by strategy, fires the first k (k = processor bound) and leaves
 * the others for later steps. With prune_stale off, stale entries are
 * ordered and selected like any other and burn their slot; a step that
 * applies nothing is then flagged gc. Body constraints are inserted only when the
 * step ends, then matched against the store to extend the conflict set.
 */
class Engine {
 public:
  explicit Engine(RunConfig config, OrderFn order = {})
      : config_(std::move(config)),
        order_(std::move(order)),
        rng_(config_.seed),
        matcher_(checked_program(config_)),
        with_sort_keys_(order_ || config_.strategy == Strategy::pars || config_.strategy == Strategy::pard) {
    trace_.strategy = config_.strategy;
    trace_.processors = config_.processors;
    trace_.seed = config_.seed;
    trace_.permute_query = config_.permute_query;
    trace_.max_steps = config_.max_steps;
    trace_.prune_stale = config_.prune_stale;

    std::vector<Term> goal = config_.goal.constraints;
    if (config_.permute_query) rng_.shuffle(goal);
    std::vector<ConstraintId> ids;
    ids.reserve(goal.size());
    for (const auto& t : goal) ids.push_back(store_.insert(t));
    trace_.initial = std::move(goal);
    conflict_set_ = matcher_.enumerate(store_, std::move(ids), next_seq_, with_sort_keys_);
  }

  const Program& program() const { return *config_.program; }
  const Store& store() const { return store_; }
  const ConflictSet& conflict_set() const { return conflict_set_; }
  const Trace& trace() const { return trace_; }

  /// True once no entry with only alive constraints is left.
  bool quiescent() const {
    return std::none_of(conflict_set_.begin(), conflict_set_.end(),
                        [&](const MatchInstance& m) { return m.all_alive(store_); });
  }

  StepMetrics parallel_step() {
    StepMetrics m;
    m.step = trace_.steps.size() + 1;
    m.applicable_raw = conflict_set_.size();
    if (config_.prune_stale) {
      conflict_set_ = prune_dead(std::move(conflict_set_), store_);
      m.applicable = conflict_set_.size();
    } else {
      m.applicable = static_cast<std::size_t>(std::count_if(
          conflict_set_.begin(), conflict_set_.end(), [&](const MatchInstance& e) { return e.all_alive(store_); }));
    }

    ConflictSet hooked;
    if (order_) hooked = order_(conflict_set_, config_.strategy, rng_);
    const std::vector<std::size_t> order = order_ ? std::vector<std::size_t>{} : ordered_indices();
    const std::size_t k = std::min(config_.processors.limit(), order_ ? hooked.size() : order.size());

    std::vector<std::uint64_t> selected_seqs;
    selected_seqs.reserve(k);
    std::vector<Term> buffer;
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // record index -> buffer range
    for (std::size_t i = 0; i < k; ++i) {
      const MatchInstance& inst = order_ ? hooked[i] : conflict_set_[order[i]];
      selected_seqs.push_back(inst.seq);
      const std::size_t before = buffer.size();
      if (apply_instance(store_, program(), inst, fresh_counter_, buffer) == ApplyOutcome::stale) continue;
      ++m.applied;
      AppliedRecord rec;
      rec.step = m.step;
      rec.instance = inst;
      rec.inserted_terms.assign(buffer.begin() + static_cast<std::ptrdiff_t>(before), buffer.end());
      trace_.applied.push_back(std::move(rec));
      spans.emplace_back(trace_.applied.size() - 1, before);
    }

    std::sort(selected_seqs.begin(), selected_seqs.end());
    std::erase_if(conflict_set_, [&](const MatchInstance& e) {
      return std::binary_search(selected_seqs.begin(), selected_seqs.end(), e.seq);
    });

    std::vector<ConstraintId> inserted;
    inserted.reserve(buffer.size());
    for (const auto& t : buffer) inserted.push_back(store_.insert(t));
    for (const auto& [rec_index, begin] : spans) {
      auto& rec = trace_.applied[rec_index];
      rec.inserted_ids.assign(inserted.begin() + static_cast<std::ptrdiff_t>(begin),
                              inserted.begin() + static_cast<std::ptrdiff_t>(begin + rec.inserted_terms.size()));
    }

    auto fresh = matcher_.enumerate(store_, inserted, next_seq_, with_sort_keys_);
    conflict_set_.insert(conflict_set_.end(), std::make_move_iterator(fresh.begin()),
                         std::make_move_iterator(fresh.end()));

    m.store_size = store_.alive_count();
    m.gc = m.applied == 0;
    trace_.steps.push_back(m);
    return m;
  }

  Trace run() {
    while (!quiescent()) {
      if (trace_.steps.size() >= config_.max_steps) {
        trace_.final_store = store_.alive_terms();
        throw StepLimitExceeded(trace_);
      }
      parallel_step();
    }
    trace_.final_store = store_.alive_terms();
    return trace_;
  }

 private:
  static const Program& checked_program(const RunConfig& config) {
    if (!config.program) throw std::invalid_argument("run config has no program");
    return *config.program;
  }

  // Same order and rng draws as order_conflict_set, without copying entries.
  std::vector<std::size_t> ordered_indices() {
    std::vector<std::size_t> idx(conflict_set_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto by_key = [&](std::size_t a, std::size_t b) {
      const auto& x = conflict_set_[a];
      const auto& y = conflict_set_[b];
      const auto c = compare_terms(x.sort_key, y.sort_key);
      if (c != 0) return c < 0;
      return x.seq < y.seq;
    };
    switch (config_.strategy) {
      case Strategy::par:
        break;
      case Strategy::pars:
        std::sort(idx.begin(), idx.end(), by_key);
        break;
      case Strategy::pard:
        std::sort(idx.begin(), idx.end(), by_key);
        std::reverse(idx.begin(), idx.end());
        break;
      case Strategy::parr:
        rng_.shuffle(idx);
        break;
    }
    return idx;
  }

  RunConfig config_;
  OrderFn order_;
  Rng rng_;
  Matcher matcher_;
  bool with_sort_keys_;
  Store store_;
  ConflictSet conflict_set_;
  Trace trace_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t fresh_counter_ = 0;
};

inline Trace run(const RunConfig& config, const OrderFn& order = {}) { return Engine(config, order).run(); }

}  // namespace parchr
