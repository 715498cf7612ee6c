#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "parchr/acceptance.hpp"
#include "parchr/bench.hpp"
#include "parchr/matcher.hpp"
#include "parchr/parser.hpp"

using namespace parchr;

namespace {

Term T(std::string_view s) { return parse_term(s); }

Store store_of(std::initializer_list<const char*> terms) {
  Store s;
  for (const char* t : terms) s.insert(T(t));
  return s;
}

}  // namespace

TEST(Enumerate, MinPairRespectsGuardAndDistinctness) {
  const auto p = parse_program("min @ min(N) \\ min(M) <=> N=<M | true.");
  Store s = store_of({"min(3)", "min(0)"});
  const auto found = enumerate_matchings(p, s, {1, 2});
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].kept_ids, std::vector<ConstraintId>{2});
  EXPECT_EQ(found[0].removed_ids, std::vector<ConstraintId>{1});
  EXPECT_EQ(*found[0].binding.find("N"), T("0"));
  EXPECT_EQ(*found[0].binding.find("M"), T("3"));
  EXPECT_EQ(found[0].rule, "min");
}

TEST(Enumerate, PrimesOnlyDivisiblePair) {
  const auto p = parse_program("sift @ prime(I) \\ prime(J) <=> J mod I =:= 0 | true.");
  Store s = store_of({"prime(2)", "prime(3)", "prime(4)", "prime(5)"});
  const auto found = enumerate_matchings(p, s, s.alive_ids());
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(s.term(found[0].kept_ids.at(0)), T("prime(2)"));
  EXPECT_EQ(s.term(found[0].removed_ids.at(0)), T("prime(4)"));
}

TEST(Enumerate, HistoryBlocksRefire) {
  const auto p = parse_program("base @ arc(X,Y,D) ==> path(X,Y,D).");
  Store s = store_of({"arc(a,b,1)"});
  std::uint64_t seq = 1;
  EXPECT_EQ(enumerate_matchings(p, s, {1}, seq).size(), 1u);
  EXPECT_TRUE(enumerate_matchings(p, s, {}, seq).empty());
  EXPECT_TRUE(enumerate_matchings(p, s, {1}, seq).empty());
  EXPECT_TRUE(s.history_contains("base", {1}));
}

TEST(Enumerate, EqualMinimaBothDirections) {
  const auto p = parse_program("min @ min(N) \\ min(M) <=> N=<M | true.");
  Store s = store_of({"min(1)", "min(1)"});
  const auto found = enumerate_matchings(p, s, s.alive_ids());
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].ids(), (std::vector<ConstraintId>{1, 2}));
  EXPECT_EQ(found[1].ids(), (std::vector<ConstraintId>{2, 1}));
}

TEST(Enumerate, SeqNumbersAreConsecutive) {
  const auto p = parse_program("min @ min(N) \\ min(M) <=> N=<M | true.");
  Store s = store_of({"min(1)", "min(2)", "min(3)"});
  std::uint64_t seq = 10;
  const auto found = enumerate_matchings(p, s, s.alive_ids(), seq);
  ASSERT_EQ(found.size(), 3u);
  for (std::size_t i = 0; i < found.size(); ++i) EXPECT_EQ(found[i].seq, 10 + i);
  EXPECT_EQ(seq, 13u);
}

TEST(Enumerate, OrderIsRuleThenIds) {
  const auto p = parse_program(
      "a @ p(X), q(X) ==> r(X).\n"
      "b @ q(X) ==> s(X).\n");
  Store s = store_of({"q(1)", "p(1)", "q(2)", "p(2)"});
  const auto found = enumerate_matchings(p, s, s.alive_ids());
  ASSERT_EQ(found.size(), 4u);
  EXPECT_EQ(found[0].rule, "a");
  EXPECT_EQ(found[0].ids(), (std::vector<ConstraintId>{2, 1}));
  EXPECT_EQ(found[1].ids(), (std::vector<ConstraintId>{4, 3}));
  EXPECT_EQ(found[2].rule, "b");
  EXPECT_EQ(found[2].ids(), std::vector<ConstraintId>{1});
  EXPECT_EQ(found[3].ids(), std::vector<ConstraintId>{3});
}

TEST(Enumerate, SortKeyShape) {
  const auto p = parse_program("min @ min(N) \\ min(M) <=> N=<M | true.");
  Store s = store_of({"min(3)", "min(0)"});
  const auto found = enumerate_matchings(p, s, {1, 2});
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].sort_key, T("rule(min,[min(0)],[min(3)])"));
}

TEST(Enumerate, GuardErrorsPropagate) {
  const auto p = parse_program("bad @ c(X), c(Y) ==> X mod Y =:= 0 | d.");
  Store s = store_of({"c(1)", "c(0)"});
  EXPECT_THROW(enumerate_matchings(p, s, s.alive_ids()), EvalError);
}

TEST(Enumerate, DeadNewIdsIgnored) {
  const auto p = parse_program("base @ arc(X,Y,D) ==> path(X,Y,D).");
  Store s = store_of({"arc(a,b,1)", "arc(b,c,1)"});
  s.kill(1);
  const auto found = enumerate_matchings(p, s, {1, 2});
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].kept_ids, std::vector<ConstraintId>{2});
}

TEST(Enumerate, IncrementalBatchesCoverEveryMatchingOnce) {
  // Without removals, the union over all batches equals brute force on the final store.
  std::uint64_t salt = 0;
  for (const auto& b : bench::benchmarks()) {
    if (b.name == "gcd2") continue;
    const auto program = bench::load_program(b);
    const auto pool = acceptance::constraint_pool(b.name);
    Rng rng(777 + ++salt);
    for (int round = 0; round < 50; ++round) {
      Store store;
      std::uint64_t seq = 1;
      std::vector<acceptance::FlatMatch> seen;
      const int batches = 1 + static_cast<int>(rng.below(4));
      for (int batch = 0; batch < batches; ++batch) {
        std::vector<ConstraintId> ids;
        const auto size = rng.below(3) + 1;
        for (std::uint64_t i = 0; i < size; ++i) ids.push_back(store.insert(pool[rng.below(pool.size())]));
        for (const auto& m : enumerate_matchings(*program, store, ids, seq))
          seen.push_back({m.rule_index, m.ids(), m.binding});
      }
      auto expected = acceptance::brute_force_matchings(*program, store);
      auto key = [](const acceptance::FlatMatch& m) { return std::make_pair(m.rule_index, m.ids); };
      auto less = [&](const auto& x, const auto& y) { return key(x) < key(y); };
      std::sort(seen.begin(), seen.end(), less);
      std::sort(expected.begin(), expected.end(), less);
      EXPECT_EQ(seen, expected) << b.name << " round " << round;
    }
  }
}

TEST(PruneDead, Examples) {
  const auto p = parse_program("min @ min(N) \\ min(M) <=> N=<M | true.");
  Store s = store_of({"min(1)", "min(2)", "min(3)"});
  const auto all = enumerate_matchings(p, s, s.alive_ids());
  EXPECT_TRUE(prune_dead({}, s).empty());
  EXPECT_EQ(prune_dead(all, s).size(), all.size());
  s.kill(2);
  const auto left = prune_dead(all, s);
  ASSERT_EQ(left.size(), 1u);
  EXPECT_EQ(left[0].ids(), (std::vector<ConstraintId>{1, 3}));
}

TEST(HeadMatchingBound, Examples) {
  const auto min = parse_program("min @ min(N) \\ min(M) <=> N=<M | true.");
  Store s = store_of({"min(1)", "min(2)", "min(3)", "min(4)", "min(5)"});
  EXPECT_EQ(count_head_matchings_bound(min, s), std::vector<std::uint64_t>{25});

  const auto floyd = parse_program("trans @ arc(X,Y,D1), path(Y,Z,D2) ==> path(X,Z,D1+D2).");
  Store f = store_of({"arc(1,2,1)", "arc(2,3,1)", "arc(3,4,1)", "path(1,2,1)", "path(2,3,1)", "path(3,4,1)",
                      "path(1,3,2)"});
  EXPECT_EQ(count_head_matchings_bound(floyd, f), std::vector<std::uint64_t>{12});
  EXPECT_EQ(count_head_matchings_bound(floyd, Store{}), std::vector<std::uint64_t>{0});
}
