#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parchr/program.hpp"
#include "parchr/rng.hpp"
#include "parchr/syntax.hpp"
#include "parchr/term.hpp"

namespace parchr::bench {

class GeneratorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  bool pass = true;
  std::string diagnostic;

  static OracleResult fail(std::string why) { return {false, std::move(why)}; }
  explicit operator bool() const noexcept { return pass; }
  /// "pass" or "fail:<diagnostic>"
  std::string label() const { return pass ? "pass" : "fail:" + diagnostic; }
};

// ---------------------------------------------------------------------------
// Program sources. The same text ships as benchmarks/<name>.chr.

inline constexpr std::string_view kMinSource = R"(% Minimum: the smaller of two candidates survives.
min @ min(N) \ min(M) <=> N=<M | true.
)";

inline constexpr std::string_view kPrimesSource = R"(% Prime sieve: remove multiples of other candidates.
sift @ prime(I) \ prime(J) <=> J mod I =:= 0 | true.
)";

inline constexpr std::string_view kGcdSource = R"(% Euclid by subtraction; the remaining nonzero gcd/1 holds the result.
gcd @ gcd(N) \ gcd(M) <=> 0<N, N=<M | gcd(M-N).
)";

inline constexpr std::string_view kFibSource = R"(% Naive Fibonacci with f(0) = f(1) = 1, summed pairwise.
0 @ findFibo(0) <=> sum(1).
1 @ findFibo(1) <=> sum(1).
n @ findFibo(N) <=> N>1 | findFibo(N-1), findFibo(N-2).
sum @ sum(N1), sum(N2) <=> sum(N1+N2).
)";

inline constexpr std::string_view kMsortSource = R"(% Merge sort on arcs A->B: each value ends up followed by its successor.
msort @ A->B \ A->C <=> A<B, B<C | B->C.
)";

inline constexpr std::string_view kFloydSource = R"(% All-pairs shortest paths.
elim @ path(X,Y,D1) \ path(X,Y,D2) <=> D1<D2 | true.
base @ arc(X,Y,D) ==> path(X,Y,D).
trans @ arc(X,Y,D1), path(Y,Z,D2) ==> X\=Z | path(X,Z,D1+D2).
)";

inline constexpr std::string_view kSatSource = R"(% SAT by enumerating all assignments and evaluating the formula tree bottom-up.
generate @ f([X|Xs],A) <=> f(Xs,[true(X)|A]), f(Xs,[false(X)|A]).
assign_true @ f([],A), eq(T,v(X)) ==> member(true(X),A) | sat(T,A,true).
assign_false @ f([],A), eq(T,v(X)) ==> member(false(X),A) | sat(T,A,false).
neg @ sat(T1,A,S1), eq(T,neg(T1)) ==> neg(S1,S), sat(T,A,S).
and @ sat(T1,A,S1), sat(T2,A,S2), eq(T,and(T1,T2)) ==> and(S1,S2,S), sat(T,A,S).
or @ sat(T1,A,S1), sat(T2,A,S2), eq(T,or(T1,T2)) ==> or(S1,S2,S), sat(T,A,S).
)";

inline constexpr std::string_view kBlocksSource = R"(% Blocks World with several robot arms.
grab @ grab(R,X), empty(R), clear(X), on(X,Y) <=> hold(R,X), clear(Y).
putOn @ putOn(R,Y), hold(R,X), clear(Y) <=> empty(R), clear(X), on(X,Y).
)";

inline constexpr std::string_view kUfSource = R"(% Basic union-find, plus foundUpdate so concurrent links cannot deadlock.
union @ union(A,B) <=> find(A,X), find(B,Y), link(X,Y).
findNode @ A->B \ find(A,X) <=> find(B,X).
findRoot @ root(A) \ find(A,X) <=> found(A,X).
linkEq @ link(X,Y), found(A,X), found(A,Y) <=> true.
linkRoot @ link(X,Y), found(A,X), found(B,Y), root(A) \ root(B) <=> B->A.
foundUpdate @ A->B \ found(A,X) <=> found(B,X).
)";

// ---------------------------------------------------------------------------
// Query generators.

namespace detail {

inline Term num(std::int64_t v) { return Term::number(v); }
inline Term sym(std::string s) { return Term::symbol(std::move(s)); }
inline Term fn(std::string f, std::vector<Term> args) { return Term::compound(std::move(f), std::move(args)); }

// Generators draw from their own stream so the run's generator is untouched.
inline Rng generator_rng(std::uint64_t seed) { return Rng(seed ^ 0x5851f42d4c957f2dULL); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw GeneratorError(what);
}

}  // namespace detail

/// min(1) .. min(n)
inline Goal gen_min(std::size_t n) {
  detail::require(n >= 1, "min needs n >= 1");
  Goal g;
  for (std::size_t v = 1; v <= n; ++v) g.constraints.push_back(detail::fn("min", {detail::num(static_cast<std::int64_t>(v))}));
  return g;
}

/// prime(2) .. prime(n)
inline Goal gen_primes(std::size_t n) {
  detail::require(n >= 2, "primes needs n >= 2");
  Goal g;
  for (std::size_t v = 2; v <= n; ++v) g.constraints.push_back(detail::fn("prime", {detail::num(static_cast<std::int64_t>(v))}));
  return g;
}

enum class GcdVariant { range, golden };

/// round(1.618^k + k), rounding halves up.
inline std::int64_t golden_value(std::size_t k) {
  return static_cast<std::int64_t>(std::floor(std::pow(1.618, static_cast<double>(k)) + static_cast<double>(k) + 0.5));
}

/// gcd(2)..gcd(n), or gcd(round(1.618^k + k)) for k = 2..n.
inline Goal gen_gcd(std::size_t n, GcdVariant variant) {
  detail::require(n >= 2, "gcd needs n >= 2");
  Goal g;
  for (std::size_t k = 2; k <= n; ++k) {
    const std::int64_t v = variant == GcdVariant::range ? static_cast<std::int64_t>(k) : golden_value(k);
    g.constraints.push_back(detail::fn("gcd", {detail::num(v)}));
  }
  return g;
}

inline Goal gen_fib(std::size_t n) {
  return Goal{{detail::fn("findFibo", {detail::num(static_cast<std::int64_t>(n))})}};
}

/// 0->v for v = 2..n, with 0 as the dummy smallest value.
inline Goal gen_msort(std::size_t n) {
  detail::require(n >= 2, "msort needs n >= 2");
  Goal g;
  for (std::size_t v = 2; v <= n; ++v)
    g.constraints.push_back(detail::fn("->", {detail::num(0), detail::num(static_cast<std::int64_t>(v))}));
  return g;
}

/**
 * arc_factor * n arcs arc(i,j,d) with 1 <= i < j <= n, no pair twice.
 * The c-th arc drawn gets d = n*(j-i)^2 + c, so distances are distinct and
 * grow quadratically with the node distance.
 */
inline Goal gen_floyd(std::size_t n, std::size_t arc_factor, std::uint64_t seed) {
  detail::require(n >= 2, "floyd needs n >= 2");
  detail::require(arc_factor >= 1, "floyd needs a positive arc factor");
  const std::size_t arcs = arc_factor * n;
  const std::size_t pairs = n * (n - 1) / 2;
  detail::require(arcs <= pairs, "floyd: " + std::to_string(arcs) + " arcs requested but only " +
                                     std::to_string(pairs) + " ordered node pairs exist");
  std::vector<std::pair<std::int64_t, std::int64_t>> all;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j) all.emplace_back(i, j);
  Rng rng = detail::generator_rng(seed);
  rng.shuffle(all);
  Goal g;
  const auto nn = static_cast<std::int64_t>(n);
  for (std::size_t c = 0; c < arcs; ++c) {
    const auto [i, j] = all[c];
    const std::int64_t d = nn * (j - i) * (j - i) + static_cast<std::int64_t>(c + 1);
    g.constraints.push_back(detail::fn("arc", {detail::num(i), detail::num(j), detail::num(d)}));
  }
  return g;
}

/**
 * Random formula over x1..xn as eq(Id, Node) constraints plus f([x1..xn], []).
 * n+1 variable leaves (each variable once, one repeated) are combined
 * pairwise, breadth first, by n and/or nodes (each with probability 1/2);
 * one neg node wraps a uniformly chosen node.
 */
inline Goal gen_sat(std::size_t n, std::uint64_t seed) {
  detail::require(n >= 1, "sat needs n >= 1");
  Rng rng = detail::generator_rng(seed);
  Goal g;
  std::size_t next_id = 0;
  auto new_id = [&] { return detail::sym("e" + std::to_string(++next_id)); };
  auto var = [](std::size_t i) { return detail::sym("x" + std::to_string(i)); };

  struct Node {
    Term id;
    Term body;
  };
  std::vector<Node> nodes;
  std::vector<std::size_t> leaves;
  for (std::size_t i = 1; i <= n; ++i) leaves.push_back(i);
  leaves.push_back(1 + static_cast<std::size_t>(rng.below(n)));
  rng.shuffle(leaves);

  std::vector<std::size_t> queue;
  for (std::size_t x : leaves) {
    nodes.push_back({new_id(), detail::fn("v", {var(x)})});
    queue.push_back(nodes.size() - 1);
  }
  std::size_t head = 0;
  while (queue.size() - head > 1) {
    const std::size_t a = queue[head++];
    const std::size_t b = queue[head++];
    const char* op = rng.coin() ? "and" : "or";
    nodes.push_back({new_id(), detail::fn(op, {nodes[a].id, nodes[b].id})});
    queue.push_back(nodes.size() - 1);
  }

  const std::size_t wrapped = static_cast<std::size_t>(rng.below(nodes.size()));
  const Term wrapped_id = nodes[wrapped].id;
  const Term neg_id = new_id();
  for (auto& node : nodes) {
    if (!node.body.is_compound() || node.body.name() == "v") continue;
    std::vector<Term> args = node.body.args();
    for (auto& a : args)
      if (a == wrapped_id) a = neg_id;
    node.body = detail::fn(node.body.name(), std::move(args));
  }
  nodes.push_back({neg_id, detail::fn("neg", {wrapped_id})});

  for (const auto& node : nodes) g.constraints.push_back(detail::fn("eq", {node.id, node.body}));
  std::vector<Term> vars;
  for (std::size_t i = 1; i <= n; ++i) vars.push_back(var(i));
  g.constraints.push_back(detail::fn("f", {Term::list(vars), Term::nil()}));
  return g;
}

/**
 * n empty arms r1..rn and block_factor*n blocks b1.. on stacks of two (a
 * single block on the last stack when the count is odd). Stack s stands on
 * the pseudo-block floor_s; floor_spare_1.. are clear floor slots. Each arm
 * grabs a different random block and is told to put it on a random block
 * or spare slot.
 */
inline Goal gen_blocks(std::size_t n, std::size_t block_factor, std::uint64_t seed) {
  detail::require(n >= 1, "blocks needs n >= 1");
  detail::require(block_factor >= 1, "blocks needs a positive block factor");
  Rng rng = detail::generator_rng(seed);
  const std::size_t b = block_factor * n;
  const std::size_t stacks = (b + 1) / 2;
  auto block = [](std::size_t i) { return detail::sym("b" + std::to_string(i)); };
  auto arm = [](std::size_t i) { return detail::sym("r" + std::to_string(i)); };

  Goal g;
  auto add = [&](std::string f, std::vector<Term> args) { g.constraints.push_back(detail::fn(std::move(f), std::move(args))); };
  for (std::size_t i = 1; i <= n; ++i) add("empty", {arm(i)});

  std::size_t next_block = 1;
  for (std::size_t s = 1; s <= stacks; ++s) {
    const Term floor = detail::sym("floor_" + std::to_string(s));
    if (b - next_block + 1 >= 2) {
      const Term top = block(next_block++);
      const Term bottom = block(next_block++);
      add("on", {top, bottom});
      add("clear", {top});
      add("on", {bottom, floor});
    } else {
      const Term only = block(next_block++);
      add("on", {only, floor});
      add("clear", {only});
    }
  }
  std::vector<Term> targets;
  for (std::size_t i = 1; i <= b; ++i) targets.push_back(block(i));
  for (std::size_t s = 1; s <= stacks; ++s) {
    const Term spare = detail::sym("floor_spare_" + std::to_string(s));
    add("clear", {spare});
    targets.push_back(spare);
  }

  std::vector<std::size_t> order(b);
  std::iota(order.begin(), order.end(), 1);
  rng.shuffle(order);
  for (std::size_t i = 1; i <= n; ++i) add("grab", {arm(i), block(order[i - 1])});
  for (std::size_t i = 1; i <= n; ++i) add("putOn", {arm(i), targets[static_cast<std::size_t>(rng.below(targets.size()))]});
  return g;
}

enum class UfVariant { dense, matching };

/// root(a1)..root(a2n) plus 2n random unions (dense) or a random perfect matching of n unions.
inline Goal gen_uf(std::size_t n, UfVariant variant, std::uint64_t seed) {
  detail::require(n >= 1, "uf needs n >= 1");
  Rng rng = detail::generator_rng(seed);
  const std::size_t nodes = 2 * n;
  auto node = [](std::size_t i) { return detail::sym("a" + std::to_string(i)); };
  Goal g;
  for (std::size_t i = 1; i <= nodes; ++i) g.constraints.push_back(detail::fn("root", {node(i)}));
  if (variant == UfVariant::dense) {
    for (std::size_t u = 0; u < nodes; ++u) {
      const std::size_t x = 1 + static_cast<std::size_t>(rng.below(nodes));
      std::size_t y = 1 + static_cast<std::size_t>(rng.below(nodes - 1));
      if (y >= x) ++y;
      g.constraints.push_back(detail::fn("union", {node(x), node(y)}));
    }
  } else {
    std::vector<std::size_t> perm(nodes);
    std::iota(perm.begin(), perm.end(), 1);
    rng.shuffle(perm);
    for (std::size_t i = 0; i < nodes; i += 2)
      g.constraints.push_back(detail::fn("union", {node(perm[i]), node(perm[i + 1])}));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Oracles. None of these touch the rule engine.

namespace detail {

inline std::vector<Term> with_functor(const std::vector<Term>& store, std::string_view f, std::size_t arity) {
  std::vector<Term> out;
  for (const auto& t : store)
    if (t.name() == f && t.arity() == arity) out.push_back(t);
  return out;
}

inline std::vector<std::int64_t> int_args(const std::vector<Term>& terms) {
  std::vector<std::int64_t> out;
  for (const auto& t : terms) out.push_back(t.arg(0).value());
  return out;
}

inline std::string join(const std::vector<Term>& terms) {
  std::string out;
  for (const auto& t : terms) out += (out.empty() ? "" : ",") + to_string(t);
  return out;
}

inline std::vector<Term> sorted(std::vector<Term> v) {
  std::sort(v.begin(), v.end(), TermLess{});
  return v;
}

inline OracleResult expect_store(const std::vector<Term>& expected, const std::vector<Term>& actual) {
  if (sorted(expected) == sorted(actual)) return {};
  return OracleResult::fail("expected {" + join(sorted(expected)) + "} got {" + join(sorted(actual)) + "}");
}

inline std::int64_t euclid(std::int64_t a, std::int64_t b) {
  while (b != 0) {
    const std::int64_t r = a % b;
    a = b;
    b = r;
  }
  return a < 0 ? -a : a;
}

}  // namespace detail

inline OracleResult oracle_min(const Goal& goal, const std::vector<Term>& final_store) {
  const auto values = detail::int_args(goal.constraints);
  if (values.empty()) return detail::expect_store({}, final_store);
  const std::int64_t smallest = *std::min_element(values.begin(), values.end());
  return detail::expect_store({detail::fn("min", {detail::num(smallest)})}, final_store);
}

/// Sieve of Eratosthenes over the candidate range.
inline OracleResult oracle_primes(const Goal& goal, const std::vector<Term>& final_store) {
  const auto values = detail::int_args(goal.constraints);
  const std::int64_t hi = values.empty() ? 0 : *std::max_element(values.begin(), values.end());
  std::vector<char> composite(static_cast<std::size_t>(std::max<std::int64_t>(hi, 1) + 1), 0);
  for (std::int64_t p = 2; p * p <= hi; ++p)
    if (!composite[static_cast<std::size_t>(p)])
      for (std::int64_t m = p * p; m <= hi; m += p) composite[static_cast<std::size_t>(m)] = 1;
  std::vector<Term> expected;
  for (std::int64_t v : values)
    if (v >= 2 && !composite[static_cast<std::size_t>(v)]) expected.push_back(detail::fn("prime", {detail::num(v)}));
  return detail::expect_store(expected, final_store);
}

/// Exactly one nonzero gcd/1 survives, holding the gcd of all inputs; every other one is gcd(0).
inline OracleResult oracle_gcd(const Goal& goal, const std::vector<Term>& final_store) {
  std::int64_t g = 0;
  for (std::int64_t v : detail::int_args(goal.constraints)) g = detail::euclid(g, v);
  std::size_t nonzero = 0;
  for (const auto& t : final_store) {
    if (t.name() != "gcd" || t.arity() != 1 || !t.arg(0).is_number())
      return OracleResult::fail("unexpected constraint " + to_string(t));
    if (t.arg(0).value() == 0) continue;
    ++nonzero;
    if (t.arg(0).value() != g)
      return OracleResult::fail("gcd(" + std::to_string(t.arg(0).value()) + ") survived, expected gcd(" + std::to_string(g) + ")");
  }
  if (nonzero != 1) return OracleResult::fail(std::to_string(nonzero) + " nonzero gcd constraints remain");
  return {};
}

/// f(0) = f(1) = 1, f(k) = f(k-1) + f(k-2).
inline std::int64_t fib_value(std::int64_t n) {
  std::int64_t a = 1;
  std::int64_t b = 1;
  for (std::int64_t k = 2; k <= n; ++k) {
    const std::int64_t c = a + b;
    a = b;
    b = c;
  }
  return b;
}

inline OracleResult oracle_fib(const Goal& goal, const std::vector<Term>& final_store) {
  std::vector<Term> expected;
  for (const auto& t : goal.constraints) expected.push_back(detail::fn("sum", {detail::num(fib_value(t.arg(0).value()))}));
  if (expected.size() > 1) {
    std::int64_t total = 0;
    for (const auto& e : expected) total += e.arg(0).value();
    expected = {detail::fn("sum", {detail::num(total)})};
  }
  return detail::expect_store(expected, final_store);
}

/// The arcs form the chain dummy -> v1 -> v2 -> ... over the sorted values.
inline OracleResult oracle_msort(const Goal& goal, const std::vector<Term>& final_store) {
  if (goal.constraints.empty()) return detail::expect_store({}, final_store);
  const std::int64_t dummy = goal.constraints.front().arg(0).value();
  std::vector<std::int64_t> values;
  for (const auto& t : goal.constraints) values.push_back(t.arg(1).value());
  std::sort(values.begin(), values.end());
  std::vector<Term> expected;
  std::int64_t prev = dummy;
  for (std::int64_t v : values) {
    expected.push_back(detail::fn("->", {detail::num(prev), detail::num(v)}));
    prev = v;
  }
  return detail::expect_store(expected, final_store);
}

/**
 * Classic O(n^3) Floyd-Warshall over the goal arcs. Every alive path(x,z,d)
 * must carry the shortest distance, every reachable pair must have one,
 * and the arcs must be untouched.
 */
inline OracleResult oracle_floyd(const Goal& goal, const std::vector<Term>& final_store) {
  std::map<std::int64_t, std::size_t> index;
  for (const auto& a : goal.constraints) {
    index.emplace(a.arg(0).value(), 0);
    index.emplace(a.arg(1).value(), 0);
  }
  std::size_t k = 0;
  std::vector<std::int64_t> label;
  for (auto& [node, i] : index) {
    i = k++;
    label.push_back(node);
  }
  constexpr std::int64_t inf = INT64_MAX / 4;
  std::vector<std::vector<std::int64_t>> dist(k, std::vector<std::int64_t>(k, inf));
  for (const auto& a : goal.constraints) {
    auto& d = dist[index[a.arg(0).value()]][index[a.arg(1).value()]];
    d = std::min(d, a.arg(2).value());
  }
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (dist[i][m] < inf && dist[m][j] < inf) dist[i][j] = std::min(dist[i][j], dist[i][m] + dist[m][j]);

  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> seen;
  std::vector<Term> arcs;
  for (const auto& t : final_store) {
    if (t.name() == "arc" && t.arity() == 3) {
      arcs.push_back(t);
      continue;
    }
    if (t.name() != "path" || t.arity() != 3) return OracleResult::fail("unexpected constraint " + to_string(t));
    auto xi = index.find(t.arg(0).value());
    auto zi = index.find(t.arg(1).value());
    if (xi == index.end() || zi == index.end()) return OracleResult::fail("path over unknown node " + to_string(t));
    const std::int64_t want = dist[xi->second][zi->second];
    if (want >= inf) return OracleResult::fail("path for unreachable pair " + to_string(t));
    if (t.arg(2).value() != want)
      return OracleResult::fail(to_string(t) + " but the shortest distance is " + std::to_string(want));
    seen[{xi->second, zi->second}] = want;
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && dist[i][j] < inf && !seen.count({i, j}))
        return OracleResult::fail("no path from " + std::to_string(label[i]) + " to " + std::to_string(label[j]));
  if (detail::sorted(arcs) != detail::sorted(goal.constraints)) return OracleResult::fail("arc constraints changed");
  return {};
}

namespace detail {

inline std::optional<bool> lookup(const std::vector<Term>& assignment, const Term& var) {
  for (const auto& lit : assignment)
    if (lit.arity() == 1 && lit.arg(0) == var) return lit.name() == "true";
  return std::nullopt;
}

inline std::optional<bool> eval_formula(const std::map<Term, Term, TermLess>& nodes, const Term& id,
                                        const std::vector<Term>& assignment, std::size_t depth = 0) {
  auto it = nodes.find(id);
  if (it == nodes.end() || depth > nodes.size()) return std::nullopt;
  const Term& body = it->second;
  if (body.name() == "v") return lookup(assignment, body.arg(0));
  auto a = eval_formula(nodes, body.arg(0), assignment, depth + 1);
  if (!a) return std::nullopt;
  if (body.name() == "neg") return !*a;
  auto b = eval_formula(nodes, body.arg(1), assignment, depth + 1);
  if (!b) return std::nullopt;
  return body.name() == "and" ? (*a && *b) : (*a || *b);
}

}  // namespace detail

/**
 * 2^n complete assignments survive as f([], A), and for every assignment and
 * every formula node there is exactly one sat(Node, A, V) with V equal to a
 * direct recursive evaluation of that node.
 */
inline OracleResult oracle_sat(const Goal& goal, const std::vector<Term>& final_store) {
  std::map<Term, Term, TermLess> nodes;
  std::vector<Term> vars;
  for (const auto& t : goal.constraints) {
    if (t.name() == "eq" && t.arity() == 2) nodes.emplace(t.arg(0), t.arg(1));
    if (t.name() == "f" && t.arity() == 2) vars = list_items(t.arg(0)).value_or(std::vector<Term>{});
  }
  const std::size_t expected_f = std::size_t{1} << vars.size();

  std::set<Term, TermLess> assignments;
  std::map<std::pair<Term, Term>, std::size_t, std::function<bool(const std::pair<Term, Term>&, const std::pair<Term, Term>&)>>
      sat_count([](const auto& a, const auto& b) {
        const auto c = compare_terms(a.first, b.first);
        return c != 0 ? c < 0 : compare_terms(a.second, b.second) < 0;
      });
  std::size_t f_count = 0;
  for (const auto& t : final_store) {
    if (t.name() == "eq" && t.arity() == 2) continue;
    if (t.name() == "f" && t.arity() == 2) {
      if (!t.arg(0).is_nil()) return OracleResult::fail("unexpanded " + to_string(t));
      ++f_count;
      assignments.insert(t.arg(1));
      continue;
    }
    if (t.name() != "sat" || t.arity() != 3) return OracleResult::fail("unexpected constraint " + to_string(t));
    const auto assignment = list_items(t.arg(1));
    if (!assignment) return OracleResult::fail("malformed assignment in " + to_string(t));
    const auto want = detail::eval_formula(nodes, t.arg(0), *assignment);
    if (!want) return OracleResult::fail("cannot evaluate " + to_string(t));
    if (t.arg(2) != Term::symbol(*want ? "true" : "false"))
      return OracleResult::fail(to_string(t) + " but the formula evaluates to " + (*want ? "true" : "false"));
    ++sat_count[{t.arg(0), t.arg(1)}];
  }
  if (f_count != expected_f)
    return OracleResult::fail(std::to_string(f_count) + " complete assignments, expected " + std::to_string(expected_f));
  if (assignments.size() != expected_f) return OracleResult::fail("duplicate assignments");
  for (const auto& a : assignments)
    for (const auto& [id, body] : nodes) {
      auto it = sat_count.find({id, a});
      const std::size_t c = it == sat_count.end() ? 0 : it->second;
      if (c != 1)
        return OracleResult::fail(std::to_string(c) + " sat constraints for node " + to_string(id) + " under " + to_string(a));
    }
  return {};
}

/**
 * World-consistency checker. Every arm is either empty or holds exactly one
 * block; every block is either on exactly one support or held by exactly
 * one arm; no support carries two blocks; every block rests on a chain that
 * reaches the floor; clear(x) is present exactly when nothing is on x and x
 * is not held.
 */
inline OracleResult oracle_blocks(const Goal& goal, const std::vector<Term>& final_store) {
  std::set<Term, TermLess> arms;
  std::set<Term, TermLess> blocks;
  std::set<Term, TermLess> places;
  for (const auto& t : goal.constraints) {
    if (t.name() == "empty") arms.insert(t.arg(0));
    if (t.name() == "on") {
      blocks.insert(t.arg(0));
      places.insert(t.arg(0));
      places.insert(t.arg(1));
    }
    if (t.name() == "clear") places.insert(t.arg(0));
  }

  std::map<Term, std::vector<Term>, TermLess> on_of;     // block -> supports
  std::map<Term, std::vector<Term>, TermLess> under;     // support -> blocks on it
  std::map<Term, std::vector<Term>, TermLess> held_by;   // block -> arms
  std::map<Term, std::vector<Term>, TermLess> holding;   // arm -> blocks
  std::map<Term, std::size_t, TermLess> empty_count;
  std::map<Term, std::size_t, TermLess> clear_count;
  for (const auto& t : final_store) {
    const auto& f = t.name();
    if (f == "on") {
      on_of[t.arg(0)].push_back(t.arg(1));
      under[t.arg(1)].push_back(t.arg(0));
    } else if (f == "hold") {
      held_by[t.arg(1)].push_back(t.arg(0));
      holding[t.arg(0)].push_back(t.arg(1));
    } else if (f == "empty") {
      ++empty_count[t.arg(0)];
    } else if (f == "clear") {
      ++clear_count[t.arg(0)];
    } else if (f != "grab" && f != "putOn") {
      return OracleResult::fail("unexpected constraint " + to_string(t));
    }
  }

  for (const auto& r : arms) {
    const std::size_t e = empty_count[r];
    const std::size_t h = holding[r].size();
    if (!((e == 1 && h == 0) || (e == 0 && h == 1)))
      return OracleResult::fail("arm " + to_string(r) + " is neither empty nor holding exactly one block");
  }
  for (const auto& b : blocks) {
    const std::size_t o = on_of[b].size();
    const std::size_t h = held_by[b].size();
    if (!((o == 1 && h == 0) || (o == 0 && h == 1)))
      return OracleResult::fail("block " + to_string(b) + " is on " + std::to_string(o) + " supports and held " +
                                std::to_string(h) + " times");
  }
  for (const auto& [support, tops] : under)
    if (tops.size() > 1) return OracleResult::fail("two blocks on " + to_string(support));
  for (const auto& b : blocks) {
    Term cur = b;
    std::size_t hops = 0;
    while (blocks.count(cur) && !on_of[cur].empty()) {
      cur = on_of[cur].front();
      if (++hops > blocks.size()) return OracleResult::fail("cyclic stack through " + to_string(b));
    }
    if (blocks.count(cur) && held_by[cur].empty()) return OracleResult::fail("block " + to_string(cur) + " floats");
  }
  for (const auto& p : places) {
    const bool free = under[p].empty() && held_by[p].empty();
    const std::size_t c = clear_count[p];
    if (free ? c != 1 : c != 0)
      return OracleResult::fail("clear(" + to_string(p) + ") count " + std::to_string(c) + " but place is " +
                                (free ? "free" : "occupied"));
  }
  return {};
}

/**
 * Only root/1 and ->/2 survive; they form a forest whose trees partition
 * the nodes exactly as a textbook disjoint-set structure fed the same
 * unions does.
 */
inline OracleResult oracle_uf(const Goal& goal, const std::vector<Term>& final_store) {
  std::vector<Term> nodes;
  std::map<Term, std::size_t, TermLess> index;
  for (const auto& t : goal.constraints)
    if (t.name() == "root") {
      index.emplace(t.arg(0), nodes.size());
      nodes.push_back(t.arg(0));
    }
  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  for (const auto& t : goal.constraints)
    if (t.name() == "union") {
      const std::size_t a = find(index.at(t.arg(0)));
      const std::size_t b = find(index.at(t.arg(1)));
      if (a != b) parent[a] = b;
    }

  std::vector<std::optional<std::size_t>> arc(nodes.size());
  std::vector<std::size_t> roots(nodes.size(), 0);
  for (const auto& t : final_store) {
    if (t.name() == "root" && t.arity() == 1) {
      auto it = index.find(t.arg(0));
      if (it == index.end()) return OracleResult::fail("root of unknown node " + to_string(t));
      ++roots[it->second];
    } else if (t.name() == "->" && t.arity() == 2) {
      auto from = index.find(t.arg(0));
      auto to = index.find(t.arg(1));
      if (from == index.end() || to == index.end()) return OracleResult::fail("arc over unknown node " + to_string(t));
      if (arc[from->second]) return OracleResult::fail("node " + to_string(t.arg(0)) + " has two parents");
      arc[from->second] = to->second;
    } else {
      return OracleResult::fail("operation constraint left over: " + to_string(t));
    }
  }
  std::vector<std::size_t> tree_root(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (arc[i] && roots[i]) return OracleResult::fail("node " + to_string(nodes[i]) + " is a root with a parent");
    if (!arc[i] && roots[i] != 1) return OracleResult::fail("node " + to_string(nodes[i]) + " has no parent and no root");
    std::size_t cur = i;
    std::size_t hops = 0;
    while (arc[cur]) {
      cur = *arc[cur];
      if (++hops > nodes.size()) return OracleResult::fail("cycle through " + to_string(nodes[i]));
    }
    tree_root[i] = cur;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if ((tree_root[i] == tree_root[j]) != (find(i) == find(j)))
        return OracleResult::fail("partition differs at " + to_string(nodes[i]) + ", " + to_string(nodes[j]));
  return {};
}

// ---------------------------------------------------------------------------
// Registry.

struct BenchmarkSpec {
  std::string_view name;
  std::string_view program_source;
  std::vector<std::string_view> variants;  // first is the default; empty when none
  std::size_t min_size = 1;
  std::function<Goal(std::size_t n, std::string_view variant, std::uint64_t seed)> generate;
  std::function<OracleResult(const Goal&, const std::vector<Term>&)> oracle;
};

inline const std::vector<BenchmarkSpec>& benchmarks() {
  static const std::vector<BenchmarkSpec> all = {
      {"min", kMinSource, {}, 1, [](std::size_t n, std::string_view, std::uint64_t) { return gen_min(n); }, oracle_min},
      {"primes", kPrimesSource, {}, 2, [](std::size_t n, std::string_view, std::uint64_t) { return gen_primes(n); }, oracle_primes},
      {"gcd", kGcdSource, {}, 2,
       [](std::size_t n, std::string_view, std::uint64_t) { return gen_gcd(n, GcdVariant::range); }, oracle_gcd},
      {"gcd2", kGcdSource, {}, 2,
       [](std::size_t n, std::string_view, std::uint64_t) { return gen_gcd(n, GcdVariant::golden); }, oracle_gcd},
      {"fib", kFibSource, {}, 0, [](std::size_t n, std::string_view, std::uint64_t) { return gen_fib(n); }, oracle_fib},
      {"msort", kMsortSource, {}, 2, [](std::size_t n, std::string_view, std::uint64_t) { return gen_msort(n); }, oracle_msort},
      {"floyd", kFloydSource, {"2", "3"}, 7,
       [](std::size_t n, std::string_view v, std::uint64_t seed) { return gen_floyd(n, v == "3" ? 3 : 2, seed); },
       oracle_floyd},
      {"sat", kSatSource, {}, 1, [](std::size_t n, std::string_view, std::uint64_t seed) { return gen_sat(n, seed); }, oracle_sat},
      {"blocks", kBlocksSource, {"1", "2"}, 1,
       [](std::size_t n, std::string_view v, std::uint64_t seed) { return gen_blocks(n, v == "2" ? 2 : 1, seed); },
       oracle_blocks},
      {"uf", kUfSource, {"dense", "matching"}, 1,
       [](std::size_t n, std::string_view v, std::uint64_t seed) {
         return gen_uf(n, v == "matching" ? UfVariant::matching : UfVariant::dense, seed);
       },
       oracle_uf},
  };
  return all;
}

inline const BenchmarkSpec* find_benchmark(std::string_view name) {
  for (const auto& b : benchmarks())
    if (b.name == name) return &b;
  return nullptr;
}

inline const BenchmarkSpec& benchmark(std::string_view name) {
  if (const auto* b = find_benchmark(name)) return *b;
  throw std::invalid_argument("unknown benchmark " + std::string(name));
}

/// A concrete benchmark instance: example, variant, size and seed.
struct Instance {
  std::string example;
  std::string variant;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/**
 * Resolves "name" or "name:variant" (gcd:gcd2 is accepted for gcd2).
 * Throws std::invalid_argument for unknown names or variants.
 */
inline std::pair<const BenchmarkSpec*, std::string> resolve_example(std::string_view spec) {
  std::string_view name = spec;
  std::string_view variant;
  if (auto colon = spec.find(':'); colon != std::string_view::npos) {
    name = spec.substr(0, colon);
    variant = spec.substr(colon + 1);
  }
  if (name == "gcd" && (variant == "gcd2" || variant == "golden")) return {&benchmark("gcd2"), ""};
  if (name == "gcd" && variant == "gcd") variant = {};
  const auto& b = benchmark(name);
  if (b.variants.empty()) {
    if (!variant.empty()) throw std::invalid_argument("benchmark " + std::string(name) + " has no variants");
    return {&b, ""};
  }
  if (variant.empty()) return {&b, std::string(b.variants.front())};
  if (std::find(b.variants.begin(), b.variants.end(), variant) == b.variants.end())
    throw std::invalid_argument("unknown variant " + std::string(variant) + " for " + std::string(name));
  return {&b, std::string(variant)};
}

inline std::shared_ptr<const Program> load_program(const BenchmarkSpec& b) {
  return std::make_shared<const Program>(parse_program(b.program_source));
}

}  // namespace parchr::bench
