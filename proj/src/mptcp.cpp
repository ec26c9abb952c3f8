// SPDX-License-Identifier: Apache-2.0
#include "mptcp.hpp"

#include "error.hpp"

namespace kpiflow {

Classification meta_validate_incoming(MetaConnState& meta, AncillaryState* ancillary,
                                      std::uint64_t dss, std::uint64_t len) {
  if (len == 0) throw Error(ErrorCode::InvalidArgument, "segment length must be positive");
  const Classification c = classify_dss(meta.dss_rcv_nxt, dss, len);

  if (c.dup_bytes > 0 && ancillary)
    ancillary->kpis.record_counter(KpiId::Duplicates, c.dup_bytes, 1);

  if (c.kind == SegmentClass::OutOfOrder) {
    meta.ofo_queue.insert(dss, len, std::nullopt);
    if (ancillary) {
      ancillary->kpis.record_counter(KpiId::Ofo, len, 1);
      ancillary->kpis.record_sample(KpiId::OfoDist, static_cast<double>(c.distance));
    }
    return c;
  }

  if (c.in_order_bytes > 0) {
    meta.dss_rcv_nxt += c.in_order_bytes;
    meta.bytes_received += c.in_order_bytes;
    if (ancillary) ancillary->kpis.record_counter(KpiId::Received, c.in_order_bytes, 1);
    std::vector<ReorderQueue<std::uint64_t>::Delivery> released;
    meta.ofo_queue.drain(meta.dss_rcv_nxt, released);
    for (const auto& r : released) {
      meta.bytes_received += r.bytes;
      if (ancillary) ancillary->kpis.record_counter(KpiId::Received, r.bytes, 1);
    }
  }
  return c;
}

void reinject(const MetaConnState& meta, TcpConnState& subflow, AncillaryState* ancillary,
              std::uint64_t from_uid, std::uint64_t bytes, std::uint32_t mss) {
  if (!meta.subflow_uids.contains(subflow.key.uid) || !meta.subflow_uids.contains(from_uid))
    throw Error(ErrorCode::UnknownSubflow,
                "subflows " + std::to_string(subflow.key.uid) + " and " +
                    std::to_string(from_uid) + " are not both attached to meta " +
                    std::to_string(meta.key.uid));
  if (bytes == 0) throw Error(ErrorCode::InvalidArgument, "reinjection must carry data");
  const auto segs = segments_for(bytes, mss);
  subflow.snd_nxt = static_cast<std::uint32_t>(subflow.snd_nxt + bytes);
  subflow.bytes_sent += bytes;
  subflow.segs_sent += segs;
  subflow.write_queue_pending = true;
  if (ancillary) {
    ancillary->kpis.record_event(KpiId::Reinjections);
    ancillary->kpis.record_counter(KpiId::Sent, bytes, segs);
  }
}

ProbeEvent meta_rto(MetaConnState& meta, AncillaryState* ancillary, Timestamp at) {
  meta.ca_open = false;
  if (ancillary) ancillary->kpis.record_event(KpiId::HolBlocking);
  ProbeEvent ev;
  ev.kind = ProbeEventKind::MetaRetransmitTimeout;
  ev.key = meta.key;
  ev.at = at;
  ev.capture = capture(meta, ancillary, at);
  ev.detail = TimerDetail{true, 0};
  return ev;
}

StateCapture capture(const MetaConnState& meta, const AncillaryState* ancillary,
                     Timestamp at) {
  StateCapture cap;
  if (ancillary) cap.kpis = ancillary->kpis.snapshot(at);
  else cap.kpis.taken_at = at;
  cap.snd_nxt = meta.bytes_sent;
  cap.rcv_nxt = meta.dss_rcv_nxt;
  cap.ca_open = meta.ca_open;
  return cap;
}

}  // namespace kpiflow
