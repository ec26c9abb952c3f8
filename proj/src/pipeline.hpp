// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "aggregator.hpp"
#include "channel.hpp"
#include "exporter.hpp"
#include "simulator.hpp"

namespace kpiflow {

struct PipelineConfig {
  SimConfig sim;
  ExportConfig exporter;
  std::size_t channel_capacity = kDefaultChannelCapacity;
  // Live mode: a full channel drops events instead of blocking the
  // simulator. Replay results are then no longer deterministic.
  bool drop_on_overflow = false;
};

struct PipelineResult {
  std::vector<PerformanceProfile> profiles;  // in emission order
  std::vector<ipfix::Bytes> messages;        // in send order
  ReplaySummary sim;
  AggregatorStats aggregator;
  ExporterStats exporter;
  std::uint64_t dropped_events = 0;
};

// Simulator on a producer thread, aggregator and exporter on the calling
// thread, joined by a bounded event channel. Rethrows simulator errors
// after the consumer has drained what was produced.
PipelineResult run_pipeline(const TraceScript& script, const PipelineConfig& config = {});

}  // namespace kpiflow
