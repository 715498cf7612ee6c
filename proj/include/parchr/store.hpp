#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "parchr/program.hpp"
#include "parchr/syntax.hpp"
#include "parchr/term.hpp"

namespace parchr {

using ConstraintId = std::uint64_t;

class DeadConstraint : public std::logic_error {
 public:
  explicit DeadConstraint(ConstraintId id)
      : std::logic_error("constraint #" + std::to_string(id) + " is not alive"), id_(id) {}
  ConstraintId id() const noexcept { return id_; }

 private:
  ConstraintId id_;
};

struct ConstraintRecord {
  ConstraintId id = 0;
  Term term;
  bool alive = true;
};

enum class HistoryStatus { fresh, seen };

/**
 * Identified multiset of ground CHR constraints.
 *
 * Ids start at 1 and follow insertion order. Killed records stay behind as
 * tombstones so a finished run can still be inspected and replayed. The
 * propagation history remembers every (rule, id tuple) that entered the
 * conflict set.
 */
class Store {
 public:
  ConstraintId insert(const Term& t) {
    if (!t.is_ground()) throw std::invalid_argument("store: cannot insert non-ground " + to_string(t));
    if (!(t.is_compound() || t.is_symbol()) || is_builtin(t))
      throw std::invalid_argument("store: not a CHR constraint: " + to_string(t));
    const ConstraintId id = records_.size() + 1;
    records_.push_back({id, t, true});
    index_[Signature::of(t)].push_back(id);  // ids grow, so the bucket stays sorted
    ++alive_;
    return id;
  }

  void kill(ConstraintId id) {
    if (!is_alive(id)) throw DeadConstraint(id);
    auto& rec = records_[id - 1];
    rec.alive = false;
    auto& bucket = index_[Signature::of(rec.term)];
    bucket.erase(std::lower_bound(bucket.begin(), bucket.end(), id));
    --alive_;
  }

  bool exists(ConstraintId id) const { return id >= 1 && id <= records_.size(); }
  bool is_alive(ConstraintId id) const { return exists(id) && records_[id - 1].alive; }

  const ConstraintRecord& record(ConstraintId id) const {
    if (!exists(id)) throw std::out_of_range("no constraint #" + std::to_string(id));
    return records_[id - 1];
  }
  const Term& term(ConstraintId id) const { return record(id).term; }

  /// Alive ids of one signature, ascending.
  const std::vector<ConstraintId>& alive_by_signature(const Signature& sig) const {
    static const std::vector<ConstraintId> empty;
    auto it = index_.find(sig);
    return it == index_.end() ? empty : it->second;
  }
  const std::vector<ConstraintId>& alive_by_signature(const std::string& functor, std::size_t arity) const {
    return alive_by_signature(Signature{functor, arity});
  }

  std::size_t alive_count() const noexcept { return alive_; }
  /// Total number of records ever inserted, dead or alive.
  std::size_t record_count() const noexcept { return records_.size(); }

  std::vector<ConstraintId> alive_ids() const {
    std::vector<ConstraintId> out;
    out.reserve(alive_);
    for (const auto& r : records_)
      if (r.alive) out.push_back(r.id);
    return out;
  }

  /// Alive constraints in id order.
  std::vector<Term> alive_terms() const {
    std::vector<Term> out;
    out.reserve(alive_);
    for (const auto& r : records_)
      if (r.alive) out.push_back(r.term);
    return out;
  }

  HistoryStatus history_check_and_add(const std::string& rule_name, const std::vector<ConstraintId>& ids) {
    return history_.insert(HistoryKey{rule_name, ids}).second ? HistoryStatus::fresh : HistoryStatus::seen;
  }

  bool history_contains(const std::string& rule_name, const std::vector<ConstraintId>& ids) const {
    return history_.count(HistoryKey{rule_name, ids}) > 0;
  }

  std::size_t history_size() const noexcept { return history_.size(); }

  /// Full-scan consistency check of the signature index against the records.
  bool index_consistent() const {
    std::size_t total = 0;
    for (const auto& [sig, ids] : index_) {
      if (!std::is_sorted(ids.begin(), ids.end())) return false;
      if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) return false;
      for (ConstraintId id : ids) {
        const auto& r = records_[id - 1];
        if (!r.alive || !(Signature::of(r.term) == sig)) return false;
      }
      total += ids.size();
    }
    const auto alive = static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const ConstraintRecord& r) { return r.alive; }));
    return total == alive && alive == alive_;
  }

 private:
  struct HistoryKey {
    std::string rule;
    std::vector<ConstraintId> ids;
    bool operator==(const HistoryKey&) const = default;
  };
  struct HistoryHash {
    std::size_t operator()(const HistoryKey& k) const noexcept {
      std::size_t h = std::hash<std::string>{}(k.rule);
      for (ConstraintId id : k.ids) h ^= std::hash<ConstraintId>{}(id) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  std::vector<ConstraintRecord> records_;
  std::map<Signature, std::vector<ConstraintId>> index_;
  std::unordered_set<HistoryKey, HistoryHash> history_;
  std::size_t alive_ = 0;
};

}  // namespace parchr
