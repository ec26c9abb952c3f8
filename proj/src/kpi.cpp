// SPDX-License-Identifier: Apache-2.0
#include "kpi.hpp"

#include <string>

#include "error.hpp"

namespace kpiflow {

std::string_view to_string(KpiId id) {
  switch (id) {
    case KpiId::Sent: return "sent";
    case KpiId::Received: return "received";
    case KpiId::Lost: return "lost";
    case KpiId::Errors: return "errors";
    case KpiId::Rtt: return "rtt";
    case KpiId::Duplicates: return "duplicates";
    case KpiId::Ofo: return "ofo";
    case KpiId::OfoDist: return "ofo_dist";
    case KpiId::Stalls: return "stalls";
    case KpiId::Reinjections: return "reinjections";
    case KpiId::HolBlocking: return "hol_blocking";
  }
  return "?";
}

KpiSet tcp_kpis() {
  return {KpiId::Sent,       KpiId::Received, KpiId::Lost,
          KpiId::Errors,     KpiId::Rtt,      KpiId::Duplicates,
          KpiId::Ofo,        KpiId::OfoDist,  KpiId::Stalls};
}

KpiSet subflow_kpis() {
  auto set = tcp_kpis();
  set.insert(KpiId::Reinjections);
  return set;
}

// The meta-socket gets its data from subflows: no corruption, no latency,
// and its timer expiries are head-of-line blocking rather than stalls.
KpiSet meta_kpis() {
  return {KpiId::Sent, KpiId::Received, KpiId::Lost,       KpiId::Duplicates,
          KpiId::Ofo,  KpiId::OfoDist,  KpiId::HolBlocking};
}

void KpiAccumulator::require(KpiId id, KpiKind kind) const {
  if (kind_of(id) != kind)
    throw Error(ErrorCode::KindMismatch,
                "KPI " + std::string(to_string(id)) + " has a different kind");
  if (!present_.contains(id))
    throw Error(ErrorCode::KindMismatch,
                "KPI " + std::string(to_string(id)) + " is not applicable");
}

void KpiAccumulator::record_counter(KpiId id, std::uint64_t bytes,
                                    std::uint64_t packets) {
  require(id, KpiKind::DualCounter);
  pairs_[index(id)] += CounterPair{bytes, packets};
}

void KpiAccumulator::record_event(KpiId id, std::uint64_t count) {
  require(id, KpiKind::EventCounter);
  events_[index(id)] += count;
}

void KpiAccumulator::record_sample(KpiId id, double value) {
  require(id, KpiKind::Sampled);
  if (!(value >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "negative KPI sample");
  stats_[index(id)].add(value);
}

KpiSnapshot KpiAccumulator::snapshot(Timestamp at) const {
  return KpiSnapshot{present_, pairs_, events_, stats_, at};
}

void KpiAccumulator::reset_window() {
  for (auto& s : stats_) s.reset();
}

KpiDelta delta(const KpiSnapshot& before, const KpiSnapshot& after) {
  if (before.taken_at > after.taken_at)
    throw Error(ErrorCode::InvalidArgument, "snapshots out of time order");
  KpiDelta out;
  out.present = after.present;
  out.t_start = before.taken_at;
  out.t_end = after.taken_at;
  for (std::size_t i = 0; i < kKpiCount; ++i) {
    const auto id = static_cast<KpiId>(i);
    if (!after.present.contains(id)) continue;
    const bool had = before.present.contains(id);
    switch (kind_of(id)) {
      case KpiKind::DualCounter: {
        const CounterPair b = had ? before.pairs[i] : CounterPair{};
        const CounterPair& a = after.pairs[i];
        if (a.bytes < b.bytes || a.packets < b.packets)
          throw Error(ErrorCode::NegativeDelta,
                      "counter " + std::string(to_string(id)) + " decreased");
        out.pairs[i] = {a.bytes - b.bytes, a.packets - b.packets};
        break;
      }
      case KpiKind::EventCounter: {
        const std::uint64_t b = had ? before.events[i] : 0;
        if (after.events[i] < b)
          throw Error(ErrorCode::NegativeDelta,
                      "counter " + std::string(to_string(id)) + " decreased");
        out.events[i] = after.events[i] - b;
        break;
      }
      case KpiKind::Sampled: {
        const auto& s = after.stats[i];
        out.stats[i] = {s.count(), s.mean(), s.variance()};
        break;
      }
    }
  }
  return out;
}

}  // namespace kpiflow
