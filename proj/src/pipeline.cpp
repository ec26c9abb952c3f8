// SPDX-License-Identifier: Apache-2.0
#include "pipeline.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace kpiflow {

PipelineResult run_pipeline(const TraceScript& script, const PipelineConfig& config) {
  BoundedChannel<ProbeEvent> channel(config.channel_capacity);
  PipelineResult result;
  std::exception_ptr sim_error;

  std::thread producer([&] {
    try {
      EventSink sink;
      if (config.drop_on_overflow) {
        sink = [&](const ProbeEvent& ev) { channel.try_push(ev); };
      } else {
        sink = [&](const ProbeEvent& ev) { channel.push(ev); };
      }
      result.sim = replay(script, sink, config.sim);
    } catch (...) {
      sim_error = std::current_exception();
    }
    channel.close();
  });

  Aggregator aggregator;
  ProfileExporter exporter(config.exporter);
  Timestamp clock = 0;
  auto append = [&](std::vector<ipfix::Bytes> msgs) {
    for (auto& m : msgs) result.messages.push_back(std::move(m));
  };

  try {
    while (auto ev = channel.pop()) {
      clock = std::max(clock, ev->at);
      append(exporter.poll(clock));
      if (auto p = aggregator.consume(*ev)) {
        append(exporter.submit(*p, clock));
        result.profiles.push_back(std::move(*p));
      }
    }
    append(exporter.flush());
  } catch (...) {
    channel.close();
    producer.join();
    throw;
  }
  producer.join();
  if (sim_error) std::rethrow_exception(sim_error);

  result.aggregator = aggregator.stats();
  result.exporter = exporter.stats();
  result.dropped_events = channel.dropped();
  return result;
}

}  // namespace kpiflow
