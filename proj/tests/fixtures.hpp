// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <vector>

#include "aggregator.hpp"
#include "profile.hpp"
#include "simulator.hpp"
#include "trace.hpp"

namespace kpiflow::testing {

inline std::string trace_path(const std::string& name) {
  return std::string(KPIFLOW_TRACE_DIR) + "/" + name;
}

inline std::vector<ProbeEvent> events_of(const TraceScript& s, SimConfig cfg = {}) {
  std::vector<ProbeEvent> out;
  replay(s, [&](const ProbeEvent& e) { out.push_back(e); }, cfg);
  return out;
}

inline std::vector<PerformanceProfile> profiles_of(const TraceScript& s, SimConfig cfg = {}) {
  Aggregator agg;
  std::vector<PerformanceProfile> out;
  replay(
      s,
      [&](const ProbeEvent& e) {
        if (auto p = agg.consume(e)) out.push_back(*p);
      },
      cfg);
  return out;
}

inline std::vector<PerformanceProfile> profiles_of(const std::string& trace_text) {
  return profiles_of(parse_trace(trace_text));
}

inline IpAddress ip(const char* s) { return *IpAddress::parse(s); }

// Random profile honoring the per-transport presence rules.
inline PerformanceProfile random_profile(std::mt19937_64& rng) {
  auto u64 = [&] { return rng(); };
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  PerformanceProfile p;
  const bool v6 = pick(2) == 1;
  auto rand_addr = [&] {
    if (v6) {
      std::array<std::uint8_t, 16> b{};
      for (auto& x : b) x = static_cast<std::uint8_t>(rng());
      return IpAddress::v6(b);
    }
    std::array<std::uint8_t, 4> b{};
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return IpAddress::v4(b);
  };
  p.key.src = {rand_addr(), static_cast<std::uint16_t>(rng())};
  p.key.dst = {rand_addr(), static_cast<std::uint16_t>(rng())};
  p.key.transport = static_cast<Transport>(pick(3));
  static const char* kIfaces[] = {"", "eth0", "wlan0", "enp0s31f6", "abcdefghijklmno"};
  p.key.iface = kIfaces[pick(5)];
  p.key.uid = u64();
  if (p.key.transport == Transport::MptcpSubflow) p.meta_uid = u64();

  static const Phase kFrom[] = {Phase::Init, Phase::Connecting, Phase::Established, Phase::Lossy};
  p.from.phase = kFrom[pick(4)];
  p.to.phase = static_cast<Phase>(pick(5));
  if (p.to.is_closed()) p.to.end_reason = static_cast<EndReason>(1 + pick(4));
  p.t_start = u64() >> 1;
  p.t_end = p.t_start + (u64() >> 2);
  p.export_seq = static_cast<std::uint32_t>(rng());

  auto pair = [&] { return CounterPair{u64(), u64()}; };
  auto stat = [&] { return WindowStat{u64(), u64(), u64()}; };
  auto& k = p.kpis;
  k.sent = pair();
  k.received = pair();
  k.lost = pair();
  k.duplicates = pair();
  k.ofo = pair();
  k.ofo_dist = stat();
  if (p.key.transport == Transport::MptcpMeta) {
    k.hol_blocking = u64();
  } else {
    k.errors = pair();
    k.rtt = stat();
    k.stalls = u64();
    if (p.key.transport == Transport::MptcpSubflow) k.reinjections = u64();
  }
  return p;
}

}  // namespace kpiflow::testing
