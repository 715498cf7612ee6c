#include <gtest/gtest.h>

#include <memory>

#include "parchr/bench.hpp"
#include "parchr/engine.hpp"
#include "parchr/parser.hpp"
#include "parchr/report.hpp"
#include "parchr/validate.hpp"

using namespace parchr;

namespace {

Term T(std::string_view s) { return parse_term(s); }

std::shared_ptr<const Program> program(std::string_view src) {
  return std::make_shared<const Program>(parse_program(src));
}

RunConfig config(std::string_view src, std::string_view query, Strategy s = Strategy::par,
                 Processors p = Processors::unbounded(), std::uint64_t seed = 1) {
  RunConfig c;
  c.program = program(src);
  c.goal = parse_query(query);
  c.strategy = s;
  c.processors = p;
  c.seed = seed;
  return c;
}

constexpr std::string_view kMin = "min @ min(N) \\ min(M) <=> N=<M | true.";
constexpr std::string_view kGcd = "gcd @ gcd(N) \\ gcd(M) <=> 0<N, N=<M | gcd(M-N).";

MatchInstance instance(const Program& p, std::string rule, std::vector<ConstraintId> kept,
                       std::vector<ConstraintId> removed, Binding b) {
  MatchInstance m;
  m.rule = rule;
  m.rule_index = p.rule_index(rule);
  m.kept_ids = std::move(kept);
  m.removed_ids = std::move(removed);
  m.binding = std::move(b);
  return m;
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : kAllStrategies) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_FALSE(parse_strategy("fifo"));
}

TEST(Processors, Labels) {
  EXPECT_EQ(Processors::unbounded().label(), "unbounded");
  EXPECT_EQ(Processors::bounded(4).label(), "4");
  EXPECT_EQ(Processors::bounded(4).limit(), 4u);
  EXPECT_THROW(Processors::bounded(0), std::invalid_argument);
}

TEST(OrderConflictSet, ParsAndPard) {
  MatchInstance a;
  a.seq = 1;
  a.sort_key = T("rule(min,[min(0)],[min(3)])");
  MatchInstance b;
  b.seq = 2;
  b.sort_key = T("rule(min,[min(0)],[min(2)])");
  MatchInstance c;
  c.seq = 3;
  c.sort_key = T("rule(min,[min(0)],[min(2)])");
  Rng rng(1);
  const auto pars = order_conflict_set({a, b, c}, Strategy::pars, rng);
  ASSERT_EQ(pars.size(), 3u);
  EXPECT_EQ(pars[0].seq, 2u);
  EXPECT_EQ(pars[1].seq, 3u);
  EXPECT_EQ(pars[2].seq, 1u);
  const auto pard = order_conflict_set({a, b, c}, Strategy::pard, rng);
  EXPECT_EQ(pard[0].seq, 1u);
  EXPECT_EQ(pard[1].seq, 3u);
  EXPECT_EQ(pard[2].seq, 2u);
  const auto par = order_conflict_set({c, a, b}, Strategy::par, rng);
  EXPECT_EQ(par[0].seq, 3u);
}

TEST(OrderConflictSet, ParrIsSeededPermutation) {
  ConflictSet cs(20);
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i].seq = i + 1;
  Rng r1(9);
  Rng r2(9);
  const auto x = order_conflict_set(cs, Strategy::parr, r1);
  const auto y = order_conflict_set(cs, Strategy::parr, r2);
  std::vector<std::uint64_t> xs;
  std::vector<std::uint64_t> ys;
  for (const auto& e : x) xs.push_back(e.seq);
  for (const auto& e : y) ys.push_back(e.seq);
  EXPECT_EQ(xs, ys);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i + 1);
  Rng r3(10);
  std::vector<std::uint64_t> zs;
  for (const auto& e : order_conflict_set(cs, Strategy::parr, r3)) zs.push_back(e.seq);
  EXPECT_NE(xs, zs);
}

TEST(ApplyInstance, SimpagationRemovesOnlyRemovedHeads) {
  const auto p = program(kMin);
  Store s;
  s.insert(T("min(3)"));
  s.insert(T("min(0)"));
  std::uint64_t fresh = 0;
  std::vector<Term> buffer;
  const auto inst = instance(*p, "min", {2}, {1}, {{"N", T("0")}, {"M", T("3")}});
  EXPECT_EQ(apply_instance(s, *p, inst, fresh, buffer), ApplyOutcome::applied);
  EXPECT_FALSE(s.is_alive(1));
  EXPECT_TRUE(s.is_alive(2));
  EXPECT_TRUE(buffer.empty());
  EXPECT_EQ(apply_instance(s, *p, inst, fresh, buffer), ApplyOutcome::stale);
}

TEST(ApplyInstance, BodyIsEvaluatedAndBuffered) {
  const auto p = program(kGcd);
  Store s;
  s.insert(T("gcd(3)"));
  s.insert(T("gcd(7)"));
  std::uint64_t fresh = 0;
  std::vector<Term> buffer;
  const auto inst = instance(*p, "gcd", {1}, {2}, {{"N", T("3")}, {"M", T("7")}});
  EXPECT_EQ(apply_instance(s, *p, inst, fresh, buffer), ApplyOutcome::applied);
  EXPECT_EQ(buffer, std::vector<Term>{T("gcd(4)")});
  EXPECT_EQ(s.alive_count(), 1u);
}

TEST(ApplyInstance, UnboundBodyVariablesBecomeFreshSymbols) {
  const auto p = program("r @ a(X) <=> b(X,Y), c(Y,Z), d(Z).");
  Store s;
  s.insert(T("a(1)"));
  std::uint64_t fresh = 4;
  std::vector<Term> buffer;
  apply_instance(s, *p, instance(*p, "r", {}, {1}, {{"X", T("1")}}), fresh, buffer);
  ASSERT_EQ(buffer.size(), 3u);
  EXPECT_EQ(buffer[0], Term::compound("b", {T("1"), Term::symbol("$g5")}));
  EXPECT_EQ(buffer[1], Term::compound("c", {Term::symbol("$g5"), Term::symbol("$g6")}));
  EXPECT_EQ(buffer[2], Term::compound("d", {Term::symbol("$g6")}));
  EXPECT_EQ(fresh, 6u);
}

TEST(ApplyInstance, BuiltinsBindForLaterConstraints) {
  const auto p = program("r @ x(A) <=> neg(A,S), y(S).");
  Store s;
  s.insert(T("x(true)"));
  std::uint64_t fresh = 0;
  std::vector<Term> buffer;
  apply_instance(s, *p, instance(*p, "r", {}, {1}, {{"A", T("true")}}), fresh, buffer);
  EXPECT_EQ(buffer, std::vector<Term>{T("y(false)")});
  EXPECT_EQ(fresh, 0u);
}

TEST(Run, MinUnboundedOneStep) {
  for (Strategy st : kAllStrategies) {
    auto c = config(kMin, "min(3),min(0),min(2)", st);
    const Trace t = run(c);
    EXPECT_EQ(t.counted_steps(), 1u) << to_string(st);
    EXPECT_EQ(t.final_store, std::vector<Term>{T("min(0)")});
  }
}

TEST(Run, MinBoundedOneIsSequential) {
  auto c = config(kMin, "min(1),min(2),min(3),min(4),min(5)", Strategy::parr, Processors::bounded(1));
  const Trace t = run(c);
  EXPECT_EQ(t.counted_steps(), 4u);
  for (const auto& m : t.steps) EXPECT_EQ(m.applied, 1u);
}

TEST(Run, MinThreeMetricsRow) {
  auto c = config(kMin, "min(1),min(2),min(3)");
  const Trace t = run(c);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0], (StepMetrics{1, 3, 3, 2, 1, false}));
}

TEST(Run, SingleConstraintTakesNoSteps) {
  auto c = config(kMin, "min(1)");
  const Trace t = run(c);
  EXPECT_EQ(t.total_steps(), 0u);
  EXPECT_EQ(t.final_store, std::vector<Term>{T("min(1)")});
}

TEST(Run, GcdSequential) {
  auto c = config(kGcd, "gcd(4),gcd(6)", Strategy::par, Processors::bounded(1));
  const Trace t = run(c);
  auto final = t.final_store;
  std::sort(final.begin(), final.end(), TermLess{});
  EXPECT_EQ(final, (std::vector<Term>{T("gcd(0)"), T("gcd(2)")}));
}

TEST(Run, PrimesThirtyUnbounded) {
  const auto& b = bench::benchmark("primes");
  RunConfig c;
  c.program = bench::load_program(b);
  c.goal = b.generate(30, "", 3);
  c.strategy = Strategy::parr;
  c.seed = 3;
  const Trace t = run(c);
  EXPECT_EQ(t.counted_steps(), 1u);
  EXPECT_EQ(t.final_store.size(), 10u);
}

TEST(Run, NoPermuteKeepsGoalOrder) {
  auto c = config(kMin, "min(3),min(1),min(2)");
  c.permute_query = false;
  EXPECT_EQ(run(c).initial, c.goal.constraints);
}

TEST(Run, StepLimitCarriesPartialTrace) {
  auto c = config("loop @ p(X) <=> p(X+1).", "p(0)");
  c.max_steps = 5;
  try {
    run(c);
    FAIL();
  } catch (const StepLimitExceeded& e) {
    EXPECT_EQ(e.trace().total_steps(), 5u);
    EXPECT_EQ(e.trace().final_store, std::vector<Term>{T("p(5)")});
  }
}

TEST(Run, DeferredInsertsAreInvisibleWithinAStep) {
  // b(1) created in step 1 only fires its rule in step 2.
  auto c = config("one @ a <=> b(1).\ntwo @ b(X) <=> c(X).", "a");
  const Trace t = run(c);
  EXPECT_EQ(t.counted_steps(), 2u);
  EXPECT_EQ(t.final_store, std::vector<Term>{T("c(1)")});
}

TEST(Run, StaleSelectionsTakeSlots) {
  // Three candidates for one removable head: one applies, two go stale in the same step.
  auto c = config("r @ k(X) \\ d <=> true.", "k(1),k(2),k(3),d");
  const Trace t = run(c);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].applicable, 3u);
  EXPECT_EQ(t.steps[0].applied, 1u);
}

TEST(Run, BoundedLeavesRestForLater) {
  auto c = config("r @ a(X) <=> b(X).", "a(1),a(2),a(3),a(4),a(5)", Strategy::par, Processors::bounded(2));
  const Trace t = run(c);
  ASSERT_EQ(t.steps.size(), 3u);
  EXPECT_EQ(t.steps[0].applicable, 5u);
  EXPECT_EQ(t.steps[0].applied, 2u);
  EXPECT_EQ(t.steps[1].applicable, 3u);
  EXPECT_EQ(t.steps[2].applied, 1u);
}

TEST(Run, KeepStaleBurnsSlotsAndMayProduceGcSteps) {
  auto c = config("r @ k(X) \\ d <=> true.\ns @ e(X) <=> true.", "k(1),k(2),k(3),d,e(1)", Strategy::par,
                  Processors::bounded(1));
  c.permute_query = false;
  c.prune_stale = false;
  const Trace t = run(c);
  std::size_t gc = 0;
  for (const auto& m : t.steps) gc += m.gc ? 1 : 0;
  EXPECT_GT(gc, 0u);
  EXPECT_LT(t.counted_steps(), t.total_steps());
  EXPECT_TRUE(validate_trace(*c.program, c.goal, t));

  c.prune_stale = true;
  const Trace pruned = run(c);
  EXPECT_EQ(pruned.counted_steps(), pruned.total_steps());
  EXPECT_EQ(pruned.final_store, t.final_store);
}

TEST(Run, CustomOrderHookIsUsed) {
  auto c = config(kMin, "min(1),min(2),min(3)", Strategy::par, Processors::bounded(1));
  std::size_t calls = 0;
  OrderFn order = [&](ConflictSet cs, Strategy s, Rng& rng) {
    ++calls;
    return order_conflict_set(std::move(cs), s, rng);
  };
  const Trace t = run(c, order);
  EXPECT_EQ(calls, t.total_steps());
}

TEST(Run, IdenticalConfigsGiveIdenticalTraces) {
  const auto& b = bench::benchmark("floyd");
  RunConfig c;
  c.program = bench::load_program(b);
  c.goal = b.generate(5, "2", 4);
  c.strategy = Strategy::parr;
  c.processors = Processors::bounded(3);
  c.seed = 4;
  const Trace x = run(c);
  const Trace y = run(c);
  EXPECT_EQ(report::emit_csv(x), report::emit_csv(y));
  EXPECT_EQ(x.final_store, y.final_store);
  ASSERT_EQ(x.applied.size(), y.applied.size());
  for (std::size_t i = 0; i < x.applied.size(); ++i) {
    EXPECT_EQ(x.applied[i].instance.ids(), y.applied[i].instance.ids());
    EXPECT_EQ(x.applied[i].inserted_terms, y.applied[i].inserted_terms);
  }
}

TEST(Validate, AcceptsEngineTraces) {
  for (Strategy st : kAllStrategies) {
    auto c = config(kMin, "min(5),min(3),min(9),min(1)", st, Processors::bounded(2), 7);
    EXPECT_TRUE(validate_trace(*c.program, c.goal, run(c)));
  }
}

TEST(Validate, RejectsTamperedRemovedId) {
  auto c = config(kMin, "min(1),min(2),min(3),min(4)", Strategy::par, Processors::bounded(1));
  Trace t = run(c);
  ASSERT_GE(t.applied.size(), 2u);
  t.applied[1].instance.removed_ids = t.applied[0].instance.removed_ids;
  const auto check = validate_trace(*c.program, c.goal, t);
  EXPECT_FALSE(check);
  EXPECT_NE(check.diagnostic.find("dead"), std::string::npos);
}

TEST(Validate, RejectsWrongFinalStoreOrBody) {
  auto c = config(kGcd, "gcd(4),gcd(6)", Strategy::par, Processors::bounded(1));
  Trace t = run(c);
  Trace wrong_final = t;
  wrong_final.final_store.push_back(T("gcd(9)"));
  EXPECT_FALSE(validate_trace(*c.program, c.goal, wrong_final));
  Trace wrong_body = t;
  wrong_body.applied[0].inserted_terms = {T("gcd(100)")};
  EXPECT_FALSE(validate_trace(*c.program, c.goal, wrong_body));
  Trace wrong_goal = t;
  wrong_goal.initial.push_back(T("gcd(1)"));
  EXPECT_FALSE(validate_trace(*c.program, c.goal, wrong_goal));
}
