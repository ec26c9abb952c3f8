// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "profile.hpp"

namespace kpiflow {

struct AggregatorStats {
  std::uint64_t events = 0;
  std::uint64_t profiles = 0;
  std::uint64_t orphans = 0;  // events for connections never registered
  std::uint64_t illegal = 0;  // events the lifecycle rejects
};

// Per-connection profile cutter. Connections register on their first
// probe (connect attempt, accept or subflow join); anything else for an
// unknown uid is dropped as an orphan.
class Aggregator {
 public:
  std::optional<PerformanceProfile> consume(const ProbeEvent& ev);

  std::size_t tracked() const { return conns_.size(); }
  const AggregatorStats& stats() const { return stats_; }

 private:
  struct Entry {
    LifecycleState life;
    KpiSnapshot last;
    std::uint32_t export_seq = 0;
  };

  std::unordered_map<std::uint64_t, Entry> conns_;
  AggregatorStats stats_;
};

bool is_registration(ProbeEventKind k);

}  // namespace kpiflow
