// SPDX-License-Identifier: Apache-2.0
#include "profile.hpp"

#include <cmath>

namespace kpiflow {

namespace {

std::uint64_t round_nonneg(double v) {
  if (!(v > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::llround(v));
}

}  // namespace

WindowStat round_window(const WindowStats& w) {
  return WindowStat{w.count, round_nonneg(w.mean), round_nonneg(w.variance)};
}

ProfileKpis to_profile_kpis(const KpiDelta& d) {
  ProfileKpis k;
  k.sent = d.counter(KpiId::Sent);
  k.received = d.counter(KpiId::Received);
  k.lost = d.counter(KpiId::Lost);
  k.duplicates = d.counter(KpiId::Duplicates);
  k.ofo = d.counter(KpiId::Ofo);
  if (d.present.contains(KpiId::Errors)) k.errors = d.counter(KpiId::Errors);
  if (d.present.contains(KpiId::Rtt)) k.rtt = round_window(d.stat(KpiId::Rtt));
  k.ofo_dist = round_window(d.stat(KpiId::OfoDist));
  if (d.present.contains(KpiId::Stalls)) k.stalls = d.event_count(KpiId::Stalls);
  if (d.present.contains(KpiId::Reinjections))
    k.reinjections = d.event_count(KpiId::Reinjections);
  if (d.present.contains(KpiId::HolBlocking))
    k.hol_blocking = d.event_count(KpiId::HolBlocking);
  return k;
}

PerformanceProfile make_profile(const ProbeEvent& ev, const LifecycleState& from,
                                const LifecycleState& to, const KpiDelta& d,
                                std::uint32_t export_seq) {
  PerformanceProfile p;
  p.key = ev.key;
  p.meta_uid = ev.key.transport == Transport::MptcpSubflow ? ev.meta_uid : std::nullopt;
  p.from = from;
  p.to = to;
  p.t_start = d.t_start;
  p.t_end = d.t_end;
  p.export_seq = export_seq;
  p.kpis = to_profile_kpis(d);
  return p;
}

std::string describe(const PerformanceProfile& p) {
  return "uid " + std::to_string(p.key.uid) + " #" + std::to_string(p.export_seq) + " " +
         p.from.to_string() + "->" + p.to.to_string() + " [" + std::to_string(p.t_start) +
         "," + std::to_string(p.t_end) + "]";
}

}  // namespace kpiflow
