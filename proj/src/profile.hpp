// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "event.hpp"
#include "fsm.hpp"

namespace kpiflow {

// Sampled KPI window as exported: integer microseconds (RTT) or bytes
// (OFO distance), variance in squared units.
struct WindowStat {
  std::uint64_t count = 0;
  std::uint64_t mean = 0;
  std::uint64_t variance = 0;

  friend bool operator==(const WindowStat&, const WindowStat&) = default;
};

WindowStat round_window(const WindowStats& w);

struct ProfileKpis {
  CounterPair sent;
  CounterPair received;
  CounterPair lost;
  CounterPair duplicates;
  CounterPair ofo;
  std::optional<CounterPair> errors;     // not on meta-sockets
  std::optional<WindowStat> rtt;         // not on meta-sockets
  WindowStat ofo_dist;
  std::optional<std::uint64_t> stalls;        // not on meta-sockets
  std::optional<std::uint64_t> reinjections;  // subflows only
  std::optional<std::uint64_t> hol_blocking;  // meta-sockets only

  friend bool operator==(const ProfileKpis&, const ProfileKpis&) = default;
};

struct PerformanceProfile {
  ConnKey key;
  std::optional<std::uint64_t> meta_uid;
  LifecycleState from;
  LifecycleState to;
  Timestamp t_start = 0;
  Timestamp t_end = 0;
  std::uint32_t export_seq = 0;
  ProfileKpis kpis;

  std::optional<EndReason> end_reason() const {
    if (to.is_closed()) return to.end_reason;
    return std::nullopt;
  }
  int ip_version() const { return key.dst.addr.version(); }

  friend bool operator==(const PerformanceProfile&, const PerformanceProfile&) = default;
};

ProfileKpis to_profile_kpis(const KpiDelta& d);

// Builds the profile for an exported transition of `ev`'s connection.
PerformanceProfile make_profile(const ProbeEvent& ev, const LifecycleState& from,
                                const LifecycleState& to, const KpiDelta& d,
                                std::uint32_t export_seq);

// Short human-readable description, for diagnostics.
std::string describe(const PerformanceProfile& p);

}  // namespace kpiflow
