#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parchr/bench.hpp"
#include "parchr/engine.hpp"
#include "parchr/matcher.hpp"
#include "parchr/parser.hpp"
#include "parchr/report.hpp"
#include "parchr/validate.hpp"

namespace parchr::acceptance {

// Pinned tolerances.
inline constexpr std::size_t kSeeds = 5;
inline constexpr std::size_t kPrimesBoundedSeeds = 10;
inline constexpr std::size_t kPrimesBoundedMaxSteps = 3;
inline constexpr double kPrimesBoundedMeanLow = 1.0;   // expected 2, +-1
inline constexpr double kPrimesBoundedMeanHigh = 3.0;
inline constexpr std::size_t kMsortUnboundedLow = 24;
inline constexpr std::size_t kMsortUnboundedHigh = 30;
inline constexpr std::size_t kMsortBoundedLow = 35;
inline constexpr std::size_t kMsortBoundedHigh = 55;
inline constexpr std::size_t kGcdRawLow = 400;
inline constexpr std::size_t kGcdRawHigh = 2000;
inline constexpr std::size_t kFloydUnboundedMax = 10;
inline constexpr std::size_t kBlocksRatio = 2;
inline constexpr std::size_t kUfStepGap = 2;
inline constexpr std::size_t kMatcherStores = 200;
inline constexpr std::size_t kMatcherMaxStore = 8;

/// One engine run inside the acceptance matrix.
struct RunSpec {
  const bench::BenchmarkSpec* bench = nullptr;
  std::string variant;
  std::size_t n = 0;
  Strategy strategy = Strategy::par;
  Processors processors;
  std::uint64_t seed = 1;
  bool prune_stale = true;

  std::string describe() const {
    std::string out(bench->name);
    if (!variant.empty()) out += ":" + variant;
    out += " n=" + std::to_string(n) + " " + std::string(to_string(strategy)) + " processors=" + processors.label() +
           " seed=" + std::to_string(seed);
    if (!prune_stale) out += " keep-stale";
    return out;
  }
};

struct RunResult {
  RunSpec spec;
  Goal goal;
  Trace trace;
  std::optional<std::string> step_limit;
  bench::OracleResult oracle;
  TraceCheck validity;
  bool deterministic = true;
  std::string csv;
  std::string json;

  bool ok() const { return !step_limit && oracle.pass && validity.ok; }
  std::size_t steps() const { return trace.counted_steps(); }

  /// Empty when the run finished, passed its oracle and replayed.
  std::string problem() const {
    if (step_limit) return spec.describe() + ": " + *step_limit;
    if (!oracle.pass) return spec.describe() + ": oracle: " + oracle.diagnostic;
    if (!validity.ok) return spec.describe() + ": replay: " + validity.diagnostic;
    return {};
  }
};

/**
 * Executes runs for the criteria. Every run is done twice to compare the
 * emitted CSV and JSON, and every trace is replayed; those two checks feed
 * the serializability and determinism criteria.
 */
class Harness {
 public:
  explicit Harness(OrderFn order = {}) : order_(std::move(order)) {}

  RunResult execute(const RunSpec& spec) {
    RunResult r;
    r.spec = spec;
    r.goal = spec.bench->generate(spec.n, spec.variant, spec.seed);
    auto program = this->program(*spec.bench);
    RunConfig config;
    config.program = program;
    config.goal = r.goal;
    config.strategy = spec.strategy;
    config.processors = spec.processors;
    config.seed = spec.seed;
    config.prune_stale = spec.prune_stale;

    auto once = [&](RunResult& into) {
      try {
        into.trace = run(config, order_);
      } catch (const StepLimitExceeded& e) {
        into.trace = e.trace();
        into.step_limit = e.what();
      }
      into.oracle = spec.bench->oracle(r.goal, into.trace.final_store);
      into.validity = validate_trace(*program, r.goal, into.trace);
      report::RunKey key{std::string(spec.bench->name), spec.variant, spec.n, spec.strategy, spec.processors, spec.seed};
      into.csv = report::emit_csv(into.trace);
      into.json = report::emit_json_summary(
          report::summarize(into.trace, key, into.oracle.label(), into.validity ? "pass" : "fail:" + into.validity.diagnostic));
    };
    once(r);
    RunResult again;
    once(again);
    r.deterministic = r.csv == again.csv && r.json == again.json;

    ++runs_;
    if (!r.validity.ok && !first_invalid_) first_invalid_ = spec.describe() + ": " + r.validity.diagnostic;
    if (!r.deterministic && !first_nondeterministic_) first_nondeterministic_ = spec.describe();
    return r;
  }

  std::size_t runs() const { return runs_; }
  const std::optional<std::string>& first_invalid() const { return first_invalid_; }
  const std::optional<std::string>& first_nondeterministic() const { return first_nondeterministic_; }

  std::shared_ptr<const Program> program(const bench::BenchmarkSpec& b) {
    auto it = programs_.find(b.name);
    if (it == programs_.end()) it = programs_.emplace(b.name, bench::load_program(b)).first;
    return it->second;
  }

 private:
  OrderFn order_;
  std::map<std::string_view, std::shared_ptr<const Program>> programs_;
  std::size_t runs_ = 0;
  std::optional<std::string> first_invalid_;
  std::optional<std::string> first_nondeterministic_;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = true;
  std::size_t runs = 0;
  std::string detail;              // first failure
  std::vector<std::string> notes;  // informational, never affects pass

  void require(bool cond, const std::function<std::string()>& why) {
    if (cond) return;
    if (pass) detail = why();
    pass = false;
  }
  void require_ok(const RunResult& r) {
    ++runs;
    require(r.ok(), [&] { return r.problem(); });
  }
};

namespace detail {

inline std::vector<std::uint64_t> seeds(std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = 1; s <= count; ++s) out.push_back(s);
  return out;
}

/// Unbounded, Bounded(n) and Bounded(1), with n clamped to at least 1.
inline std::vector<Processors> processor_grid(std::size_t n) {
  return {Processors::unbounded(), Processors::bounded(std::max<std::size_t>(n, 1)), Processors::bounded(1)};
}

inline std::string range_note(const std::string& label, const std::vector<std::size_t>& steps) {
  if (steps.empty()) return label + ": no runs";
  const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
  return label + ": counted steps " + std::to_string(*lo) + ".." + std::to_string(*hi);
}

}  // namespace detail

inline CriterionResult criterion_min_sequential(Harness& h) {
  CriterionResult c{1, "Minimum: Bounded(1) takes n-1 steps for n = 5, 7, 30"};
  for (std::size_t n : {5, 7, 30})
    for (Strategy s : kAllStrategies)
      for (auto seed : detail::seeds(kSeeds)) {
        auto r = h.execute({&bench::benchmark("min"), "", n, s, Processors::bounded(1), seed});
        c.require_ok(r);
        c.require(r.steps() == n - 1, [&] {
          return r.spec.describe() + ": " + std::to_string(r.steps()) + " steps, expected " + std::to_string(n - 1);
        });
      }
  return c;
}

inline CriterionResult criterion_min_unbounded(Harness& h) {
  CriterionResult c{2, "Minimum: unbounded takes one step for n = 5, 7, 30"};
  for (std::size_t n : {5, 7, 30})
    for (Strategy s : kAllStrategies)
      for (auto seed : detail::seeds(kSeeds)) {
        auto r = h.execute({&bench::benchmark("min"), "", n, s, Processors::unbounded(), seed});
        c.require_ok(r);
        c.require(r.steps() == 1, [&] { return r.spec.describe() + ": " + std::to_string(r.steps()) + " steps, expected 1"; });
      }
  return c;
}

inline CriterionResult criterion_primes(Harness& h) {
  CriterionResult c{3, "Primes: one unbounded step; Bounded(30) needs at most 3, about 2, steps"};
  const auto& primes = bench::benchmark("primes");
  for (Strategy s : kAllStrategies)
    for (auto seed : detail::seeds(kSeeds)) {
      auto r = h.execute({&primes, "", 30, s, Processors::unbounded(), seed});
      c.require_ok(r);
      c.require(r.steps() == 1, [&] { return r.spec.describe() + ": " + std::to_string(r.steps()) + " steps, expected 1"; });
    }
  std::size_t total = 0;
  std::size_t count = 0;
  for (Strategy s : kAllStrategies)
    for (auto seed : detail::seeds(kPrimesBoundedSeeds)) {
      auto r = h.execute({&primes, "", 30, s, Processors::bounded(30), seed});
      c.require_ok(r);
      c.require(r.steps() <= kPrimesBoundedMaxSteps,
                [&] { return r.spec.describe() + ": " + std::to_string(r.steps()) + " steps, expected at most 3"; });
      total += r.steps();
      ++count;
    }
  const double mean = static_cast<double>(total) / static_cast<double>(count);
  c.require(mean >= kPrimesBoundedMeanLow && mean <= kPrimesBoundedMeanHigh,
            [&] { return "Bounded(30) mean steps " + std::to_string(mean) + " outside [1, 3]"; });
  c.notes.push_back("Bounded(30) mean counted steps " + report::Ratio{total, count}.fixed2());
  return c;
}

/**
 * Asserted on the random strategy, the configuration behind the reference
 * measurements. The other strategies and the keep-stale accounting are
 * reported as notes.
 */
inline CriterionResult criterion_msort(Harness& h) {
  CriterionResult c{4, "Merge sort n = 30 (parr): unbounded in [24, 30] steps, Bounded(30) in [35, 55]"};
  const auto& msort = bench::benchmark("msort");
  for (auto seed : detail::seeds(kSeeds)) {
    auto u = h.execute({&msort, "", 30, Strategy::parr, Processors::unbounded(), seed});
    c.require_ok(u);
    c.require(u.steps() >= kMsortUnboundedLow && u.steps() <= kMsortUnboundedHigh,
              [&] { return u.spec.describe() + ": " + std::to_string(u.steps()) + " steps, expected 24..30"; });
    auto b = h.execute({&msort, "", 30, Strategy::parr, Processors::bounded(30), seed});
    c.require_ok(b);
    c.require(b.steps() >= kMsortBoundedLow && b.steps() <= kMsortBoundedHigh,
              [&] { return b.spec.describe() + ": " + std::to_string(b.steps()) + " steps, expected 35..55"; });
  }
  for (Strategy s : kAllStrategies) {
    for (auto p : {Processors::unbounded(), Processors::bounded(30)}) {
      for (bool prune : {true, false}) {
        if (s == Strategy::parr && prune) continue;
        std::vector<std::size_t> steps;
        for (auto seed : detail::seeds(kSeeds)) {
          auto r = h.execute({&msort, "", 30, s, p, seed, prune});
          c.require(r.ok(), [&] { return r.problem(); });
          steps.push_back(r.steps());
        }
        std::string label = std::string(to_string(s)) + " processors=" + p.label() + (prune ? "" : " keep-stale");
        c.notes.push_back(detail::range_note(label, steps));
      }
    }
  }
  return c;
}

inline CriterionResult criterion_gcd(Harness& h) {
  CriterionResult c{5, "GCD: one nonzero gcd survives for gcd and gcd2, n = 7, 30; gcd n = 30 peak applicable_raw in [400, 2000]"};
  for (std::string_view name : {"gcd", "gcd2"})
    for (std::size_t n : {7, 30})
      for (Strategy s : kAllStrategies)
        for (const auto& p : detail::processor_grid(n))
          for (auto seed : detail::seeds(kSeeds)) {
            auto r = h.execute({&bench::benchmark(name), "", n, s, p, seed});
            c.require_ok(r);
            if (name == "gcd" && n == 30 && !r.step_limit) {
              std::size_t peak = 0;
              for (const auto& m : r.trace.steps) peak = std::max(peak, m.applicable_raw);
              c.require(peak >= kGcdRawLow && peak <= kGcdRawHigh, [&] {
                return r.spec.describe() + ": peak applicable_raw " + std::to_string(peak) + " outside [400, 2000]";
              });
            }
          }
  return c;
}

inline CriterionResult criterion_fib(Harness& h) {
  CriterionResult c{6, "Fibonacci: final sum(f(n)) for n = 0, 1, 5, 7; unbounded steps <= 2n+2"};
  for (std::size_t n : {0, 1, 5, 7})
    for (Strategy s : kAllStrategies)
      for (const auto& p : detail::processor_grid(n))
        for (auto seed : detail::seeds(kSeeds)) {
          auto r = h.execute({&bench::benchmark("fib"), "", n, s, p, seed});
          c.require_ok(r);
          if (p.is_unbounded())
            c.require(r.steps() <= 2 * n + 2, [&] {
              return r.spec.describe() + ": " + std::to_string(r.steps()) + " steps, expected at most " + std::to_string(2 * n + 2);
            });
        }
  return c;
}

inline CriterionResult criterion_sat(Harness& h) {
  CriterionResult c{7, "SAT: 2^n complete assignments, correct sat/3 values, unbounded applies every applicable instance"};
  for (std::size_t n : {3, 5})
    for (Strategy s : kAllStrategies)
      for (const auto& p : detail::processor_grid(n))
        for (auto seed : detail::seeds(kSeeds)) {
          auto r = h.execute({&bench::benchmark("sat"), "", n, s, p, seed});
          c.require_ok(r);
          if (!p.is_unbounded()) continue;
          for (const auto& m : r.trace.steps)
            c.require(m.applied == m.applicable, [&] {
              return r.spec.describe() + ": step " + std::to_string(m.step) + " applied " + std::to_string(m.applied) +
                     " of " + std::to_string(m.applicable);
            });
        }
  return c;
}

inline CriterionResult criterion_floyd(Harness& h) {
  CriterionResult c{8, "Floyd-Warshall n = 7: shortest distances match; unbounded steps <= 10"};
  for (std::string_view variant : {"2", "3"})
    for (Strategy s : kAllStrategies)
      for (const auto& p : detail::processor_grid(7))
        for (auto seed : detail::seeds(kSeeds)) {
          auto r = h.execute({&bench::benchmark("floyd"), std::string(variant), 7, s, p, seed});
          c.require_ok(r);
          if (p.is_unbounded())
            c.require(r.steps() <= kFloydUnboundedMax,
                      [&] { return r.spec.describe() + ": " + std::to_string(r.steps()) + " steps, expected at most 10"; });
        }
  return c;
}

inline CriterionResult criterion_blocks(Harness& h) {
  CriterionResult c{9, "Blocks World n = 5, 30: consistent worlds; Bounded(n) within a factor 2 of unbounded"};
  for (std::size_t n : {5, 30})
    for (std::string_view variant : {"1", "2"})
      for (Strategy s : kAllStrategies)
        for (auto seed : detail::seeds(kSeeds)) {
          std::map<bool, std::size_t> steps;
          for (const auto& p : detail::processor_grid(n)) {
            auto r = h.execute({&bench::benchmark("blocks"), std::string(variant), n, s, p, seed});
            c.require_ok(r);
            if (p.is_unbounded() || p.limit() == n) steps[p.is_unbounded()] = r.steps();
          }
          const std::size_t u = steps[true];
          const std::size_t b = steps[false];
          c.require(std::max(u, b) <= kBlocksRatio * std::min(u, b), [&] {
            return "blocks:" + std::string(variant) + " n=" + std::to_string(n) + " " + std::string(to_string(s)) +
                   " seed=" + std::to_string(seed) + ": unbounded " + std::to_string(u) + " vs bounded " +
                   std::to_string(b) + " steps";
          });
        }
  return c;
}

inline CriterionResult criterion_uf(Harness& h) {
  CriterionResult c{10, "Union-Find n = 5, 15: valid forest, oracle partition, |Bounded(2n) - unbounded| <= 2"};
  for (std::size_t n : {5, 15})
    for (std::string_view variant : {"dense", "matching"})
      for (Strategy s : kAllStrategies)
        for (auto seed : detail::seeds(kSeeds)) {
          std::size_t u = 0;
          std::size_t b = 0;
          for (const auto& p : {Processors::unbounded(), Processors::bounded(2 * n), Processors::bounded(1)}) {
            auto r = h.execute({&bench::benchmark("uf"), std::string(variant), n, s, p, seed});
            c.require_ok(r);
            if (p.is_unbounded()) u = r.steps();
            else if (p.limit() == 2 * n) b = r.steps();
          }
          c.require((u > b ? u - b : b - u) <= kUfStepGap, [&] {
            return "uf:" + std::string(variant) + " n=" + std::to_string(n) + " " + std::string(to_string(s)) +
                   " seed=" + std::to_string(seed) + ": unbounded " + std::to_string(u) + " vs Bounded(2n) " +
                   std::to_string(b) + " steps";
          });
        }
  return c;
}

// ---------------------------------------------------------------------------
// Matcher oracle.

struct FlatMatch {
  std::size_t rule_index = 0;
  std::vector<ConstraintId> ids;
  Binding binding;
  friend bool operator==(const FlatMatch&, const FlatMatch&) = default;
};

/// Every injective assignment of alive ids to head positions, checked head by head, then the whole guard.
inline std::vector<FlatMatch> brute_force_matchings(const Program& program, const Store& store) {
  std::vector<FlatMatch> out;
  const auto alive = store.alive_ids();
  for (std::size_t ri = 0; ri < program.rules.size(); ++ri) {
    const Rule& rule = program.rules[ri];
    const auto heads = rule.heads();
    std::vector<ConstraintId> chosen;
    std::function<void(const Binding&)> place = [&](const Binding& b) {
      if (chosen.size() == heads.size()) {
        for (const auto& g : rule.guard)
          if (!eval_guard_atom(substitute(g, b))) return;
        out.push_back({ri, chosen, b});
        return;
      }
      for (ConstraintId id : alive) {
        if (std::find(chosen.begin(), chosen.end(), id) != chosen.end()) continue;
        auto m = match(heads[chosen.size()], store.term(id), b);
        if (!m) continue;
        chosen.push_back(id);
        place(*m);
        chosen.pop_back();
      }
    };
    place(Binding{});
  }
  return out;
}

/// Ground constraints that random test stores for a benchmark are drawn from.
inline std::vector<Term> constraint_pool(std::string_view name) {
  std::vector<std::string> text;
  auto each = [](std::initializer_list<const char*> xs) { return std::vector<std::string>(xs.begin(), xs.end()); };
  const auto small = each({"0", "1", "2", "3", "4"});
  if (name == "min") {
    for (const auto& v : small) text.push_back("min(" + v + ")");
  } else if (name == "primes") {
    for (int v = 1; v <= 9; ++v) text.push_back("prime(" + std::to_string(v) + ")");
  } else if (name == "gcd" || name == "gcd2") {
    for (int v = 0; v <= 6; ++v) text.push_back("gcd(" + std::to_string(v) + ")");
  } else if (name == "fib") {
    for (int v = 0; v <= 3; ++v) text.push_back("findFibo(" + std::to_string(v) + ")");
    for (int v = 1; v <= 3; ++v) text.push_back("sum(" + std::to_string(v) + ")");
  } else if (name == "msort") {
    for (const auto& a : small)
      for (const auto& b : small) text.push_back(a + "->" + b);
  } else if (name == "floyd") {
    for (const auto& f : each({"arc", "path"}))
      for (const auto& x : each({"1", "2", "3"}))
        for (const auto& y : each({"1", "2", "3"}))
          for (const auto& d : each({"1", "2", "3"})) text.push_back(f + "(" + x + "," + y + "," + d + ")");
  } else if (name == "sat") {
    const auto assignments = each({"[true(x1)]", "[false(x1)]", "[true(x2),false(x1)]"});
    for (const auto& l : each({"[]", "[x1]", "[x2,x1]"}))
      for (const auto& a : each({"[]", "[true(x1)]"})) text.push_back("f(" + l + "," + a + ")");
    for (const auto& a : assignments) text.push_back("f([]," + a + ")");
    for (const auto& t : each({"e1", "e2", "e3"}))
      for (const auto& b : each({"v(x1)", "v(x2)", "neg(e1)", "and(e1,e2)", "or(e2,e1)"}))
        text.push_back("eq(" + t + "," + b + ")");
    for (const auto& t : each({"e1", "e2"}))
      for (const auto& a : assignments)
        for (const auto& v : each({"true", "false"})) text.push_back("sat(" + t + "," + a + "," + v + ")");
  } else if (name == "blocks") {
    const auto arms = each({"r1", "r2"});
    const auto blocks = each({"b1", "b2", "b3"});
    for (const auto& r : arms) {
      text.push_back("empty(" + r + ")");
      for (const auto& x : blocks)
        for (const auto& f : each({"grab", "putOn", "hold"})) text.push_back(f + "(" + r + "," + x + ")");
    }
    for (const auto& x : blocks) {
      text.push_back("clear(" + x + ")");
      for (const auto& y : blocks) text.push_back("on(" + x + "," + y + ")");
    }
  } else if (name == "uf") {
    const auto nodes = each({"a1", "a2", "a3"});
    const auto handles = each({"a1", "a2", "'$g1'"});
    for (const auto& a : nodes) {
      text.push_back("root(" + a + ")");
      for (const auto& b : nodes) {
        text.push_back("union(" + a + "," + b + ")");
        text.push_back(a + "->" + b);
      }
      for (const auto& x : handles) {
        text.push_back("find(" + a + "," + x + ")");
        text.push_back("found(" + a + "," + x + ")");
      }
    }
    for (const auto& x : handles)
      for (const auto& y : handles) text.push_back("link(" + x + "," + y + ")");
  } else {
    throw std::invalid_argument("no constraint pool for " + std::string(name));
  }
  std::vector<Term> out;
  for (const auto& t : text) out.push_back(parse_term(t));
  return out;
}

inline CriterionResult criterion_matcher(std::uint64_t seed = 12) {
  CriterionResult c{12, "Matcher: incremental enumeration equals brute force on 200 random stores per program"};
  std::uint64_t salt = 0;
  for (const auto& b : bench::benchmarks()) {
    if (b.name == "gcd2") continue;  // same program as gcd
    const auto program = bench::load_program(b);
    const auto pool = constraint_pool(b.name);
    Rng rng(seed * 1000 + ++salt);
    for (std::size_t round = 0; round < kMatcherStores; ++round) {
      Store store;
      const std::size_t size = static_cast<std::size_t>(rng.below(kMatcherMaxStore + 1));
      for (std::size_t i = 0; i < size; ++i) store.insert(pool[static_cast<std::size_t>(rng.below(pool.size()))]);
      const auto expected = brute_force_matchings(*program, store);
      const auto found = enumerate_matchings(*program, store, store.alive_ids());
      std::vector<FlatMatch> actual;
      for (const auto& m : found) actual.push_back({m.rule_index, m.ids(), m.binding});
      ++c.runs;
      c.require(actual == expected, [&] {
        std::string stored;
        for (const auto& t : store.alive_terms()) stored += (stored.empty() ? "" : ",") + to_string(t);
        return std::string(b.name) + " store {" + stored + "}: " + std::to_string(actual.size()) +
               " matchings, brute force finds " + std::to_string(expected.size());
      });
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

struct Options {
  /// Replaces the strategy ordering in every run (fault injection).
  OrderFn order;
  /// Called as soon as each criterion is decided.
  std::function<void(const CriterionResult&)> on_result;
  /// Criterion ids to run; empty runs all. 11 and 13 cover whichever runs were made.
  std::vector<int> only;

  bool wants(int id) const { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); }
};

inline std::vector<CriterionResult> run_all(const Options& options = {}) {
  Harness h(options.order);
  std::vector<CriterionResult> out;
  auto emit = [&](CriterionResult c) {
    if (options.on_result) options.on_result(c);
    out.push_back(std::move(c));
  };
  using Criterion = CriterionResult (*)(Harness&);
  const std::pair<int, Criterion> run_based[] = {
      {1, criterion_min_sequential}, {2, criterion_min_unbounded}, {3, criterion_primes}, {4, criterion_msort},
      {5, criterion_gcd},            {6, criterion_fib},           {7, criterion_sat},     {8, criterion_floyd},
      {9, criterion_blocks},         {10, criterion_uf},
  };
  for (const auto& [id, fn] : run_based)
    if (options.wants(id)) emit(fn(h));

  if (options.wants(11)) {
    CriterionResult serial{11, "Serializability: every trace of criteria 1-10 replays sequentially"};
    serial.runs = h.runs();
    if (h.first_invalid()) serial.require(false, [&] { return *h.first_invalid(); });
    emit(std::move(serial));
  }
  if (options.wants(12)) emit(criterion_matcher());
  if (options.wants(13)) {
    CriterionResult determinism{13, "Determinism: repeated runs give byte-identical CSV and JSON"};
    determinism.runs = h.runs();
    if (h.first_nondeterministic())
      determinism.require(false, [&] { return *h.first_nondeterministic() + " differs between runs"; });
    emit(std::move(determinism));
  }
  return out;
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& c) { return c.pass; });
}

/// "PASS  3 Primes: ... (45 runs)" plus indented detail and notes.
inline std::string format_line(const CriterionResult& c) {
  std::string out = std::string(c.pass ? "PASS" : "FAIL") + " " + (c.id < 10 ? " " : "") + std::to_string(c.id) + " " +
                    c.name + " (" + std::to_string(c.runs) + " runs)\n";
  if (!c.pass) out += "       failed: " + c.detail + "\n";
  for (const auto& n : c.notes) out += "       note: " + n + "\n";
  return out;
}

inline std::string to_json(const std::vector<CriterionResult>& results) {
  nlohmann::ordered_json doc;
  doc["passed"] = all_passed(results);
  doc["criteria"] = nlohmann::ordered_json::array();
  for (const auto& c : results) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["runs"] = c.runs;
    j["detail"] = c.detail;
    j["notes"] = c.notes;
    doc["criteria"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace parchr::acceptance
