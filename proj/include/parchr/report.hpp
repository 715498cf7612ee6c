#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "parchr/engine.hpp"
#include "parchr/metrics.hpp"

namespace parchr::report {

inline constexpr std::string_view kCsvHeader = "step,applicable,applicable_raw,applied,store_size,gc";

inline std::string emit_csv(const std::vector<StepMetrics>& steps) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& m : steps) {
    out += std::to_string(m.step) + ',' + std::to_string(m.applicable) + ',' + std::to_string(m.applicable_raw) + ',' +
           std::to_string(m.applied) + ',' + std::to_string(m.store_size) + ',' + (m.gc ? '1' : '0') + '\n';
  }
  return out;
}

inline std::string emit_csv(const Trace& trace) { return emit_csv(trace.steps); }

/// Inverse of emit_csv. Throws std::invalid_argument on malformed input.
inline std::vector<StepMetrics> parse_csv(std::string_view text) {
  std::vector<StepMetrics> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("metrics csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::size_t> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      if (cell.empty() || !std::all_of(cell.begin(), cell.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw std::invalid_argument("metrics csv: bad cell '" + cell + "'");
      cells.push_back(std::stoull(cell));
    }
    if (cells.size() != 6 || cells[5] > 1) throw std::invalid_argument("metrics csv: bad row '" + line + "'");
    out.push_back({cells[0], cells[1], cells[2], cells[3], cells[4], cells[5] == 1});
  }
  return out;
}

/// Non-negative fraction kept exact until it is rendered.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  /// Two decimals, halves rounded up; 0/0 renders as 0.00.
  std::string fixed2() const {
    if (den == 0) return "0.00";
    const std::uint64_t hundredths = (200 * num + den) / (2 * den);
    std::string frac = std::to_string(hundredths % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(hundredths / 100) + "." + frac;
  }
  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
};

/// Identifies one run inside an experiment grid.
struct RunKey {
  std::string example;
  std::string variant;
  std::size_t n = 0;
  Strategy strategy = Strategy::par;
  Processors processors;
  std::uint64_t seed = 0;

  // Sort order for aggregate rows: numbers numerically, bounded processors before unbounded.
  auto order_tuple() const {
    return std::make_tuple(example, variant, n, static_cast<int>(strategy), processors.is_unbounded(),
                           processors.limit(), seed);
  }
};

struct RunSummary {
  RunKey key;
  bool permute_query = true;
  std::size_t max_steps = 0;
  bool prune_stale = true;
  std::size_t counted_steps = 0;
  std::size_t total_steps = 0;
  Ratio mean_applicable;
  Ratio mean_applicable_raw;
  Ratio mean_applied;
  std::size_t max_applied = 0;
  std::size_t final_store_size = 0;
  std::string oracle_result = "skipped";
  std::string validator_result = "pass";

  bool passed() const { return oracle_result.rfind("fail", 0) != 0 && validator_result.rfind("fail", 0) != 0; }
};

/// Means are taken over counted (non-gc) steps.
inline RunSummary summarize(const Trace& trace, RunKey key, std::string oracle_result = "skipped",
                            std::string validator_result = "pass") {
  RunSummary s;
  s.key = std::move(key);
  s.key.strategy = trace.strategy;
  s.key.processors = trace.processors;
  s.key.seed = trace.seed;
  s.permute_query = trace.permute_query;
  s.max_steps = trace.max_steps;
  s.prune_stale = trace.prune_stale;
  s.total_steps = trace.total_steps();
  s.counted_steps = trace.counted_steps();
  std::uint64_t applicable = 0;
  std::uint64_t raw = 0;
  std::uint64_t applied = 0;
  for (const auto& m : trace.steps) {
    if (m.gc) continue;
    applicable += m.applicable;
    raw += m.applicable_raw;
    applied += m.applied;
    s.max_applied = std::max(s.max_applied, m.applied);
  }
  s.mean_applicable = {applicable, s.counted_steps};
  s.mean_applicable_raw = {raw, s.counted_steps};
  s.mean_applied = {applied, s.counted_steps};
  s.final_store_size = trace.final_store.size();
  s.oracle_result = std::move(oracle_result);
  s.validator_result = std::move(validator_result);
  return s;
}

namespace detail {

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

/// One JSON object, keys in a fixed order, means with two decimals.
inline std::string emit_json_summary(const RunSummary& s) {
  using detail::json_string;
  std::string out = "{";
  auto field = [&](std::string_view name, const std::string& rendered) {
    if (out.size() > 1) out += ",";
    out += "\n  " + json_string(name) + ": " + rendered;
  };
  field("example", json_string(s.key.example));
  field("variant", json_string(s.key.variant));
  field("n", std::to_string(s.key.n));
  field("strategy", json_string(to_string(s.key.strategy)));
  field("processors", json_string(s.key.processors.label()));
  field("seed", std::to_string(s.key.seed));
  field("permute_query", s.permute_query ? "true" : "false");
  field("max_steps", std::to_string(s.max_steps));
  field("prune_stale", s.prune_stale ? "true" : "false");
  field("counted_steps", std::to_string(s.counted_steps));
  field("total_steps", std::to_string(s.total_steps));
  field("mean_applicable", s.mean_applicable.fixed2());
  field("mean_applicable_raw", s.mean_applicable_raw.fixed2());
  field("mean_applied", s.mean_applied.fixed2());
  field("max_applied", std::to_string(s.max_applied));
  field("final_store_size", std::to_string(s.final_store_size));
  field("oracle_result", json_string(s.oracle_result));
  field("validator_result", json_string(s.validator_result));
  out += "\n}\n";
  return out;
}

inline constexpr std::string_view kAggregateHeader =
    "example,variant,n,strategy,processors,seed,counted_steps,total_steps,mean_applicable,mean_applicable_raw,"
    "mean_applied,max_applied,final_store_size,oracle_result,validator_result";

/// One row per run, sorted by (example, variant, n, strategy, processors, seed).
inline std::string aggregate(std::vector<RunSummary> summaries) {
  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const RunSummary& a, const RunSummary& b) { return a.key.order_tuple() < b.key.order_tuple(); });
  std::string out(kAggregateHeader);
  out += '\n';
  for (const auto& s : summaries) {
    using detail::csv_field;
    out += csv_field(s.key.example) + ',' + csv_field(s.key.variant) + ',' + std::to_string(s.key.n) + ',' +
           std::string(to_string(s.key.strategy)) + ',' + s.key.processors.label() + ',' + std::to_string(s.key.seed) +
           ',' + std::to_string(s.counted_steps) + ',' + std::to_string(s.total_steps) + ',' +
           s.mean_applicable.fixed2() + ',' + s.mean_applicable_raw.fixed2() + ',' + s.mean_applied.fixed2() + ',' +
           std::to_string(s.max_applied) + ',' + std::to_string(s.final_store_size) + ',' +
           csv_field(s.oracle_result) + ',' + csv_field(s.validator_result) + '\n';
  }
  return out;
}

/// <example>_<n>_<strategy>_<processors>_<seed>; the variant is appended to the example when present.
inline std::string file_stem(const RunKey& key) {
  std::string example = key.example;
  if (!key.variant.empty()) example += "-" + key.variant;
  return example + "_" + std::to_string(key.n) + "_" + std::string(to_string(key.strategy)) + "_" +
         key.processors.label() + "_" + std::to_string(key.seed);
}

}  // namespace parchr::report
