// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "event.hpp"
#include "fsm.hpp"
#include "kpi.hpp"
#include "seq.hpp"

namespace kpiflow {

inline constexpr std::uint32_t kDefaultMss = 1448;

// The kernel-side view of one TCP connection (or MPTCP subflow).
struct TcpConnState {
  ConnKey key;
  std::uint32_t snd_nxt = 0;
  std::uint32_t rcv_nxt = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;  // in-order bytes
  std::uint64_t segs_sent = 0;
  std::uint64_t segs_received = 0;  // every inbound data segment
  std::uint64_t bytes_retrans = 0;
  double srtt_us = 0.0;
  double rttvar_us = 0.0;
  bool has_rtt = false;
  bool ca_open = true;
  bool write_queue_pending = false;
  bool fin_sent_acked = false;
  bool fin_received = false;
  ReorderQueue<std::uint32_t> ofo_queue;
};

// Per-connection KPI state kept outside the transport's own structures.
struct AncillaryState {
  KpiAccumulator kpis;
};

// Bounded map of ancillary state, one entry per monitored connection.
class AncillaryTable {
 public:
  static constexpr std::size_t kDefaultCapacity = 3000;

  explicit AncillaryTable(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}

  // Returns nullptr and counts a refusal when the table is full.
  AncillaryState* register_connection(std::uint64_t uid, KpiSet kpis);
  AncillaryState* find(std::uint64_t uid);
  const AncillaryState* find(std::uint64_t uid) const;
  void purge(std::uint64_t uid) { entries_.erase(uid); }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t refused() const { return refused_; }

 private:
  std::size_t capacity_;
  std::uint64_t refused_ = 0;
  std::unordered_map<std::uint64_t, AncillaryState> entries_;
};

inline std::uint64_t segments_for(std::uint64_t bytes, std::uint32_t mss) {
  return bytes == 0 ? 0 : (bytes + mss - 1) / mss;
}

// Smoothed RTT and variation per RFC 6298; also records the sample in the
// Rtt KPI when `ancillary` is non-null. Throws InvalidArgument on 0.
void update_rtt(TcpConnState& state, AncillaryState* ancillary, std::uint64_t sample_us);

struct Delivered {
  std::uint64_t bytes = 0;
  std::optional<std::uint64_t> dss;
};

// Receive-path accounting for one data segment: duplicates, reordering and
// in-order delivery (including bytes released from the out-of-order queue,
// reported through `delivered`).
Classification validate_incoming(TcpConnState& state, AncillaryState* ancillary,
                                 std::uint32_t seq, std::uint64_t len,
                                 std::optional<std::uint64_t> dss = std::nullopt,
                                 std::vector<Delivered>* delivered = nullptr);

StateCapture capture(const TcpConnState& state, const AncillaryState* ancillary,
                     Timestamp at);

// Retransmission-timer expiry. A stall is counted while connecting (lost
// SYN) or when data is waiting in the write queue.
ProbeEvent fire_retransmit_timer(TcpConnState& state, AncillaryState* ancillary,
                                 const LifecycleState& lifecycle,
                                 std::uint64_t retrans_bytes, Timestamp at,
                                 std::uint32_t mss = kDefaultMss);

}  // namespace kpiflow
