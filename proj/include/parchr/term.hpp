#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace parchr {

/**
 * Immutable first-order term: integer, symbol, variable or compound.
 *
 * A Term is a cheap handle onto a shared node, so copies never deep-copy the
 * argument tree. A compound with zero arguments is normalized to a symbol.
 * Variables start with an uppercase letter or an underscore.
 */
class Term {
 public:
  enum class Kind : std::uint8_t { number, symbol, variable, compound };

  /// The number 0.
  Term() : node_(zero_node()) {}

  static Term number(std::int64_t value) {
    return Term(std::make_shared<Node>(Kind::number, value, std::string{}, std::vector<Term>{}, true));
  }

  static Term symbol(std::string name) {
    return Term(std::make_shared<Node>(Kind::symbol, 0, std::move(name), std::vector<Term>{}, true));
  }

  static Term variable(std::string name) {
    if (name.empty()) throw std::invalid_argument("variable name must not be empty");
    return Term(std::make_shared<Node>(Kind::variable, 0, std::move(name), std::vector<Term>{}, false));
  }

  static Term compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return symbol(std::move(functor));
    const bool ground = std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
    return Term(std::make_shared<Node>(Kind::compound, 0, std::move(functor), std::move(args), ground));
  }

  static Term compound(std::string functor, std::initializer_list<Term> args) {
    return compound(std::move(functor), std::vector<Term>(args));
  }

  /// Proper list built from `.`/2 cells, terminated by `tail` (default `[]`).
  static Term list(const std::vector<Term>& items, std::optional<Term> tail = std::nullopt) {
    Term out = tail ? *tail : nil();
    for (auto it = items.rbegin(); it != items.rend(); ++it) out = compound(".", {*it, out});
    return out;
  }

  static Term nil() { return symbol("[]"); }

  Kind kind() const noexcept { return node_->kind; }
  bool is_number() const noexcept { return kind() == Kind::number; }
  bool is_symbol() const noexcept { return kind() == Kind::symbol; }
  bool is_variable() const noexcept { return kind() == Kind::variable; }
  bool is_compound() const noexcept { return kind() == Kind::compound; }
  bool is_ground() const noexcept { return node_->ground; }

  std::int64_t value() const noexcept { return node_->value; }
  /// Symbol name, variable name or compound functor.
  const std::string& name() const noexcept { return node_->name; }
  const std::vector<Term>& args() const noexcept { return node_->args; }
  std::size_t arity() const noexcept { return node_->args.size(); }
  const Term& arg(std::size_t i) const { return node_->args.at(i); }

  bool is_nil() const noexcept { return is_symbol() && name() == "[]"; }
  bool is_cons() const noexcept { return is_compound() && arity() == 2 && name() == "."; }

  bool same_node(const Term& other) const noexcept { return node_ == other.node_; }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Node {
    Node(Kind k, std::int64_t v, std::string n, std::vector<Term> a, bool g)
        : kind(k), value(v), name(std::move(n)), args(std::move(a)), ground(g) {}
    Kind kind;
    std::int64_t value;
    std::string name;
    std::vector<Term> args;
    bool ground;
  };

  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static const std::shared_ptr<const Node>& zero_node() {
    static const std::shared_ptr<const Node> zero =
        std::make_shared<const Node>(Kind::number, 0, std::string{}, std::vector<Term>{}, true);
    return zero;
  }

  std::shared_ptr<const Node> node_;
};

/// Structural equality.
inline bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::number:
      return a.value() == b.value();
    case Term::Kind::symbol:
    case Term::Kind::variable:
      return a.name() == b.name();
    case Term::Kind::compound:
      if (a.arity() != b.arity() || a.name() != b.name()) return false;
      for (std::size_t i = 0; i < a.arity(); ++i)
        if (a.args()[i] != b.args()[i]) return false;
      return true;
  }
  return false;
}

/**
 * Variable bindings produced by one-way matching. Kept sorted by variable
 * name; every bound value is ground and a name is bound at most once.
 */
class Binding {
 public:
  using Entry = std::pair<std::string, Term>;

  Binding() = default;
  Binding(std::initializer_list<Entry> entries) {
    for (const auto& [name, value] : entries)
      if (!bind(name, value)) throw std::invalid_argument("conflicting binding for " + name);
  }

  const Term* find(std::string_view name) const {
    auto it = lower(name);
    return it != entries_.end() && it->first == name ? &it->second : nullptr;
  }

  bool contains(std::string_view name) const { return find(name) != nullptr; }

  /// Binds `name` to `value`; returns false if already bound to a different term.
  bool bind(std::string_view name, const Term& value) {
    auto it = lower(name);
    if (it != entries_.end() && it->first == name) return it->second == value;
    entries_.emplace(it, std::string(name), value);
    return true;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  friend bool operator==(const Binding& a, const Binding& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry>::const_iterator lower(std::string_view name) const {
    return std::lower_bound(entries_.begin(), entries_.end(), name,
                            [](const Entry& e, std::string_view n) { return e.first < n; });
  }
  std::vector<Entry>::iterator lower(std::string_view name) {
    return std::lower_bound(entries_.begin(), entries_.end(), name,
                            [](const Entry& e, std::string_view n) { return e.first < n; });
  }

  std::vector<Entry> entries_;
};

namespace detail {

// Extends `acc` in place; on failure `acc` may hold partial bindings.
inline bool match_into(const Term& pattern, const Term& subject, Binding& acc) {
  switch (pattern.kind()) {
    case Term::Kind::variable:
      return acc.bind(pattern.name(), subject);
    case Term::Kind::number:
      return subject.is_number() && subject.value() == pattern.value();
    case Term::Kind::symbol:
      return subject.is_symbol() && subject.name() == pattern.name();
    case Term::Kind::compound: {
      if (!subject.is_compound() || subject.arity() != pattern.arity() || subject.name() != pattern.name())
        return false;
      if (pattern.is_ground()) return pattern == subject;
      for (std::size_t i = 0; i < pattern.arity(); ++i)
        if (!match_into(pattern.args()[i], subject.args()[i], acc)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/**
 * One-way matching of `pattern` against the ground `subject`, extending `acc`.
 * Returns nullopt when the two disagree or a variable would be rebound to a
 * different value.
 */
inline std::optional<Binding> match(const Term& pattern, const Term& subject, Binding acc = {}) {
  if (!subject.is_ground()) throw std::invalid_argument("match: subject must be ground");
  if (!detail::match_into(pattern, subject, acc)) return std::nullopt;
  return acc;
}

/// Replaces bound variables; unbound ones stay in place.
inline Term substitute(const Term& pattern, const Binding& b) {
  if (pattern.is_ground()) return pattern;
  if (pattern.is_variable()) {
    const Term* v = b.find(pattern.name());
    return v ? *v : pattern;
  }
  if (!pattern.is_compound()) return pattern;
  std::vector<Term> args;
  args.reserve(pattern.arity());
  for (const auto& a : pattern.args()) args.push_back(substitute(a, b));
  return Term::compound(pattern.name(), std::move(args));
}

/// Appends the names of variables in `t` (left to right, without duplicates).
inline void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.is_ground()) return;
  if (t.is_variable()) {
    if (std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
    return;
  }
  for (const auto& a : t.args()) collect_variables(a, out);
}

/**
 * Canonical total order on ground terms: numbers < symbols < compounds.
 * Numbers compare by value, symbols by name, compounds by arity, then
 * functor, then arguments left to right. Variables (only reachable for
 * non-ground input) sort after compounds by name.
 */
inline std::strong_ordering compare_terms(const Term& a, const Term& b) {
  if (a.same_node(b)) return std::strong_ordering::equal;
  auto rank = [](Term::Kind k) {
    switch (k) {
      case Term::Kind::number: return 0;
      case Term::Kind::symbol: return 1;
      case Term::Kind::compound: return 2;
      case Term::Kind::variable: return 3;
    }
    return 4;
  };
  if (a.kind() != b.kind()) return rank(a.kind()) <=> rank(b.kind());
  switch (a.kind()) {
    case Term::Kind::number:
      return a.value() <=> b.value();
    case Term::Kind::symbol:
    case Term::Kind::variable:
      return a.name().compare(b.name()) <=> 0;
    case Term::Kind::compound: {
      if (auto c = a.arity() <=> b.arity(); c != 0) return c;
      if (auto c = a.name().compare(b.name()) <=> 0; c != 0) return c;
      for (std::size_t i = 0; i < a.arity(); ++i)
        if (auto c = compare_terms(a.args()[i], b.args()[i]); c != 0) return c;
      return std::strong_ordering::equal;
    }
  }
  return std::strong_ordering::equal;
}

struct TermLess {
  bool operator()(const Term& a, const Term& b) const { return compare_terms(a, b) < 0; }
};

/// Elements of a proper list; nullopt if `t` is not a `[]`-terminated list.
inline std::optional<std::vector<Term>> list_items(const Term& t) {
  std::vector<Term> out;
  Term cur = t;
  while (cur.is_cons()) {
    out.push_back(cur.args()[0]);
    cur = cur.args()[1];
  }
  if (!cur.is_nil()) return std::nullopt;
  return out;
}

}  // namespace parchr
