// SPDX-License-Identifier: Apache-2.0
#include "tcp_sim.hpp"

#include <cmath>

#include "error.hpp"

namespace kpiflow {

AncillaryState* AncillaryTable::register_connection(std::uint64_t uid, KpiSet kpis) {
  if (auto it = entries_.find(uid); it != entries_.end()) return &it->second;
  if (entries_.size() >= capacity_) {
    ++refused_;
    return nullptr;
  }
  return &entries_.emplace(uid, AncillaryState{KpiAccumulator(kpis)}).first->second;
}

AncillaryState* AncillaryTable::find(std::uint64_t uid) {
  auto it = entries_.find(uid);
  return it == entries_.end() ? nullptr : &it->second;
}

const AncillaryState* AncillaryTable::find(std::uint64_t uid) const {
  auto it = entries_.find(uid);
  return it == entries_.end() ? nullptr : &it->second;
}

void update_rtt(TcpConnState& state, AncillaryState* ancillary, std::uint64_t sample_us) {
  if (sample_us == 0) throw Error(ErrorCode::InvalidArgument, "RTT sample must be positive");
  const double r = static_cast<double>(sample_us);
  if (!state.has_rtt) {
    state.srtt_us = r;
    state.rttvar_us = r / 2.0;
    state.has_rtt = true;
  } else {
    state.rttvar_us = 0.75 * state.rttvar_us + 0.25 * std::fabs(state.srtt_us - r);
    state.srtt_us = 0.875 * state.srtt_us + 0.125 * r;
  }
  if (ancillary) ancillary->kpis.record_sample(KpiId::Rtt, r);
}

Classification validate_incoming(TcpConnState& state, AncillaryState* ancillary,
                                 std::uint32_t seq, std::uint64_t len,
                                 std::optional<std::uint64_t> dss,
                                 std::vector<Delivered>* delivered) {
  if (len == 0 || len >= (1ull << 31))
    throw Error(ErrorCode::InvalidArgument, "segment length out of range");
  const Classification c = classify(state.rcv_nxt, seq, len);
  ++state.segs_received;

  auto deliver = [&](std::uint64_t bytes, std::optional<std::uint64_t> tag) {
    state.rcv_nxt = static_cast<std::uint32_t>(state.rcv_nxt + bytes);
    state.bytes_received += bytes;
    if (ancillary) ancillary->kpis.record_counter(KpiId::Received, bytes, 1);
    if (delivered) delivered->push_back({bytes, tag});
  };

  if (c.dup_bytes > 0 && ancillary)
    ancillary->kpis.record_counter(KpiId::Duplicates, c.dup_bytes, 1);

  if (c.kind == SegmentClass::OutOfOrder) {
    state.ofo_queue.insert(seq, len, dss);
    if (ancillary) {
      ancillary->kpis.record_counter(KpiId::Ofo, len, 1);
      ancillary->kpis.record_sample(KpiId::OfoDist, static_cast<double>(c.distance));
    }
    return c;
  }

  if (c.in_order_bytes > 0) {
    std::optional<std::uint64_t> tag;
    if (dss) tag = *dss + c.dup_bytes;
    deliver(c.in_order_bytes, tag);
    std::vector<ReorderQueue<std::uint32_t>::Delivery> released;
    std::uint32_t cursor = state.rcv_nxt;
    state.ofo_queue.drain(cursor, released);
    for (const auto& r : released) deliver(r.bytes, r.tag);
  }
  return c;
}

StateCapture capture(const TcpConnState& state, const AncillaryState* ancillary,
                     Timestamp at) {
  StateCapture cap;
  if (ancillary) cap.kpis = ancillary->kpis.snapshot(at);
  else cap.kpis.taken_at = at;
  cap.snd_nxt = state.snd_nxt;
  cap.rcv_nxt = state.rcv_nxt;
  cap.srtt_us = state.srtt_us;
  cap.rttvar_us = state.rttvar_us;
  cap.segs_received = state.segs_received;
  cap.ca_open = state.ca_open;
  cap.write_queue_pending = state.write_queue_pending;
  return cap;
}

ProbeEvent fire_retransmit_timer(TcpConnState& state, AncillaryState* ancillary,
                                 const LifecycleState& lifecycle,
                                 std::uint64_t retrans_bytes, Timestamp at,
                                 std::uint32_t mss) {
  if (lifecycle.is_closed() || lifecycle.phase == Phase::Init)
    throw Error(ErrorCode::SimViolation, "retransmission timer on an inactive connection");
  const bool stalled = lifecycle.phase == Phase::Connecting || state.write_queue_pending;
  state.ca_open = false;
  if (retrans_bytes > 0) {
    state.bytes_retrans += retrans_bytes;
    if (ancillary)
      ancillary->kpis.record_counter(KpiId::Lost, retrans_bytes, segments_for(retrans_bytes, mss));
  }
  if (stalled && ancillary) ancillary->kpis.record_event(KpiId::Stalls);

  ProbeEvent ev;
  ev.kind = ProbeEventKind::RetransmitTimeout;
  ev.key = state.key;
  ev.at = at;
  ev.capture = capture(state, ancillary, at);
  ev.detail = TimerDetail{stalled, retrans_bytes};
  return ev;
}

}  // namespace kpiflow
