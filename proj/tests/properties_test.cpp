// Engine invariants checked over every benchmark, strategy and processor model at small sizes.
#include <gtest/gtest.h>

#include <map>

#include "parchr/bench.hpp"
#include "parchr/engine.hpp"
#include "parchr/report.hpp"
#include "parchr/validate.hpp"

using namespace parchr;

namespace {

struct Case {
  std::string_view bench;
  std::string_view variant;
  std::size_t n;
};

const Case kCases[] = {
    {"min", "", 7},   {"primes", "", 15},    {"gcd", "", 7},       {"gcd2", "", 7},
    {"fib", "", 5},   {"msort", "", 8},      {"floyd", "2", 5},    {"floyd", "3", 7},
    {"sat", "", 3},   {"blocks", "1", 4},    {"blocks", "2", 3},   {"uf", "dense", 3},
    {"uf", "matching", 4},
};

constexpr std::uint64_t kSeeds = 3;

std::string label(const Case& c, Strategy s, const Processors& p, std::uint64_t seed) {
  return std::string(c.bench) + ":" + std::string(c.variant) + " n=" + std::to_string(c.n) + " " +
         std::string(to_string(s)) + " " + p.label() + " seed " + std::to_string(seed);
}

RunConfig make(const Case& c, Strategy s, Processors p, std::uint64_t seed) {
  const auto& b = bench::benchmark(c.bench);
  RunConfig cfg;
  cfg.program = bench::load_program(b);
  cfg.goal = b.generate(c.n, c.variant, seed);
  cfg.strategy = s;
  cfg.processors = p;
  cfg.seed = seed;
  return cfg;
}

std::vector<Processors> models(const Case& c) {
  return {Processors::unbounded(), Processors::bounded(1), Processors::bounded(2), Processors::bounded(c.n)};
}

// Alive constraints per signature at the start of every step, from the initial store and applied records.
std::vector<std::map<Signature, std::size_t>> alive_at_step_start(const Trace& t) {
  Store store;
  for (const auto& term : t.initial) store.insert(term);
  std::vector<std::map<Signature, std::size_t>> out;
  std::size_t rec = 0;
  for (const auto& m : t.steps) {
    std::map<Signature, std::size_t> counts;
    for (const auto& term : store.alive_terms()) ++counts[Signature::of(term)];
    out.push_back(std::move(counts));
    std::vector<Term> pending;
    for (; rec < t.applied.size() && t.applied[rec].step == m.step; ++rec) {
      for (ConstraintId id : t.applied[rec].instance.removed_ids) store.kill(id);
      pending.insert(pending.end(), t.applied[rec].inserted_terms.begin(), t.applied[rec].inserted_terms.end());
    }
    for (const auto& term : pending) store.insert(term);
  }
  return out;
}

}  // namespace

TEST(Properties, TracesReplaySequentially) {
  for (const auto& c : kCases)
    for (Strategy s : kAllStrategies)
      for (const auto& p : models(c))
        for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
          const auto cfg = make(c, s, p, seed);
          const auto t = run(cfg);
          const auto check = validate_trace(*cfg.program, cfg.goal, t);
          EXPECT_TRUE(check) << label(c, s, p, seed) << ": " << check.diagnostic;
          const auto oracle = bench::benchmark(c.bench).oracle(cfg.goal, t.final_store);
          EXPECT_TRUE(oracle) << label(c, s, p, seed) << ": " << oracle.diagnostic;
        }
}

TEST(Properties, PerStepBounds) {
  for (const auto& c : kCases)
    for (Strategy s : kAllStrategies)
      for (const auto& p : models(c))
        for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
          const auto cfg = make(c, s, p, seed);
          const auto t = run(cfg);
          const auto alive = alive_at_step_start(t);
          std::size_t applied_total = 0;
          for (std::size_t i = 0; i < t.steps.size(); ++i) {
            const auto& m = t.steps[i];
            EXPECT_EQ(m.step, i + 1);
            EXPECT_LE(m.applied, std::min(p.limit(), m.applicable)) << label(c, s, p, seed);
            EXPECT_LE(m.applicable, m.applicable_raw);
            EXPECT_EQ(m.gc, m.applied == 0);
            EXPECT_FALSE(m.gc) << label(c, s, p, seed) << " step " << m.step;
            if (p == Processors::bounded(1)) EXPECT_EQ(m.applied, 1u) << label(c, s, p, seed);
            applied_total += m.applied;

            // each removed head position consumes a distinct constraint of its signature
            std::map<std::string, std::size_t> per_rule;
            for (const auto& rec : t.applied)
              if (rec.step == m.step) ++per_rule[rec.instance.rule];
            for (const auto& [name, count] : per_rule) {
              const Rule& rule = *cfg.program->find_rule(name);
              for (const auto& h : rule.removed) {
                const auto it = alive[i].find(Signature::of(h));
                const std::size_t avail = it == alive[i].end() ? 0 : it->second;
                EXPECT_LE(count, avail) << label(c, s, p, seed) << " rule " << name << " step " << m.step;
              }
            }
          }
          EXPECT_EQ(applied_total, t.applied.size());
          if (!t.steps.empty()) EXPECT_EQ(t.steps.back().store_size, t.final_store.size());
        }
}

TEST(Properties, Deterministic) {
  for (const auto& c : kCases)
    for (Strategy s : kAllStrategies) {
      const auto cfg = make(c, s, Processors::bounded(2), 5);
      const auto a = run(cfg);
      const auto b = run(cfg);
      EXPECT_EQ(report::emit_csv(a), report::emit_csv(b)) << c.bench;
      EXPECT_EQ(a.initial, b.initial);
      EXPECT_EQ(a.final_store, b.final_store);
      report::RunKey key{std::string(c.bench), std::string(c.variant), c.n, s, {}, 5};
      EXPECT_EQ(report::emit_json_summary(report::summarize(a, key)),
                report::emit_json_summary(report::summarize(b, key)));
    }
}

TEST(Properties, ConfluentResults) {
  for (Strategy s : kAllStrategies)
    for (const auto& p : {Processors::unbounded(), Processors::bounded(1), Processors::bounded(3)})
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto min = run(make({"min", "", 9}, s, p, seed));
        EXPECT_EQ(min.final_store, std::vector<Term>{Term::compound("min", {Term::number(1)})});
        const auto primes = run(make({"primes", "", 20}, s, p, seed));
        auto final = primes.final_store;
        std::sort(final.begin(), final.end(), TermLess{});
        std::vector<Term> expected;
        for (int v : {2, 3, 5, 7, 11, 13, 17, 19}) expected.push_back(Term::compound("prime", {Term::number(v)}));
        EXPECT_EQ(final, expected);
      }
}

TEST(Properties, MoreProcessorsNeverNeedMoreSteps) {
  for (const auto& c : kCases)
    for (Strategy s : kAllStrategies)
      for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const auto unbounded = run(make(c, s, Processors::unbounded(), seed)).counted_steps();
        const auto some = run(make(c, s, Processors::bounded(2), seed)).counted_steps();
        const auto one = run(make(c, s, Processors::bounded(1), seed)).counted_steps();
        const auto where = std::string(c.bench) + ":" + std::string(c.variant) + " " +
                           std::string(to_string(s)) + " seed " + std::to_string(seed);
        EXPECT_LE(unbounded, some) << where;
        EXPECT_LE(some, one) << where;
      }
}
