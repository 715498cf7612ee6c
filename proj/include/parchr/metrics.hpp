#pragma once

#include <cstddef>

namespace parchr {

/// Counters for one simulated parallel step.
struct StepMetrics {
  std::size_t step = 0;            // 1-based
  std::size_t applicable = 0;      // alive conflict-set entries after pruning
  std::size_t applicable_raw = 0;  // entries before pruning
  std::size_t applied = 0;
  std::size_t store_size = 0;      // alive constraints after the deferred inserts
  bool gc = false;                 // applied == 0

  friend bool operator==(const StepMetrics&, const StepMetrics&) = default;
};

}  // namespace parchr
