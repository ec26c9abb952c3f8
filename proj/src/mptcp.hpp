// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>

#include "event.hpp"
#include "seq.hpp"
#include "tcp_sim.hpp"

namespace kpiflow {

// The MPTCP meta-socket: one bytestream over several subflows. Carries no
// RTT or Errors KPI.
struct MetaConnState {
  ConnKey key;  // transport == MptcpMeta
  std::set<std::uint64_t> subflow_uids;      // every subflow ever attached
  std::set<std::uint64_t> live_subflow_uids;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t dss_rcv_nxt = 0;
  bool ca_open = true;
  ReorderQueue<std::uint64_t> ofo_queue;
};

// Same byte algebra as the TCP receive path over the data-sequence space.
// Out-of-order data reflects subflow performance skew; duplicates reflect
// data the peer reinjected.
Classification meta_validate_incoming(MetaConnState& meta, AncillaryState* ancillary,
                                      std::uint64_t dss, std::uint64_t len);

// Counts one reinjection on `subflow` of data originally sent on
// `from_uid`. Throws UnknownSubflow unless both belong to `meta`.
void reinject(const MetaConnState& meta, TcpConnState& subflow, AncillaryState* ancillary,
              std::uint64_t from_uid, std::uint64_t bytes,
              std::uint32_t mss = kDefaultMss);

// Meta-level retransmission timeout: head-of-line blocking.
ProbeEvent meta_rto(MetaConnState& meta, AncillaryState* ancillary, Timestamp at);

StateCapture capture(const MetaConnState& meta, const AncillaryState* ancillary,
                     Timestamp at);

}  // namespace kpiflow
