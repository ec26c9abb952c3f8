// SPDX-License-Identifier: Apache-2.0
#include "aggregator.hpp"

#include "error.hpp"

namespace kpiflow {

bool is_registration(ProbeEventKind k) {
  return k == ProbeEventKind::ConnectAttempt || k == ProbeEventKind::AcceptEstablished ||
         k == ProbeEventKind::SubflowJoin;
}

std::optional<PerformanceProfile> Aggregator::consume(const ProbeEvent& ev) {
  ++stats_.events;
  auto it = conns_.find(ev.key.uid);
  if (it == conns_.end()) {
    if (!is_registration(ev.kind)) {
      ++stats_.orphans;
      return std::nullopt;
    }
    Entry e;
    e.last.present = ev.capture.kpis.present;
    e.last.taken_at = ev.at;
    it = conns_.emplace(ev.key.uid, std::move(e)).first;
  }
  Entry& entry = it->second;

  FsmStep step;
  try {
    step = apply_event(entry.life, ev);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::IllegalTransition) throw;
    ++stats_.illegal;
    return std::nullopt;
  }
  if (!step.exported) {
    entry.life = step.next;
    return std::nullopt;
  }

  KpiSnapshot now = ev.capture.kpis;
  now.taken_at = ev.at;
  auto profile = make_profile(ev, entry.life, step.next, delta(entry.last, now),
                              ++entry.export_seq);
  entry.last = std::move(now);
  entry.life = step.next;
  if (entry.life.is_closed()) conns_.erase(it);
  ++stats_.profiles;
  return profile;
}

}  // namespace kpiflow
