// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "address.hpp"
#include "kpi.hpp"

namespace kpiflow {

enum class Transport : std::uint8_t { Tcp = 0, MptcpSubflow = 1, MptcpMeta = 2 };

std::string_view to_string(Transport t);
std::optional<Transport> transport_from_string(std::string_view s);

struct ConnKey {
  Endpoint src;
  Endpoint dst;
  Transport transport = Transport::Tcp;
  std::string iface;  // at most 15 characters
  std::uint64_t uid = 0;

  friend bool operator==(const ConnKey&, const ConnKey&) = default;
};

inline constexpr std::size_t kMaxIfaceLength = 15;

enum class EndReason : std::uint8_t { Finished = 1, Reset = 2, ConnectError = 3, Other = 4 };

std::string_view to_string(EndReason r);
std::optional<EndReason> end_reason_from_string(std::string_view s);

enum class ProbeEventKind : std::uint8_t {
  ConnectAttempt,
  ConnectError,
  ConnectEstablished,
  AcceptEstablished,
  RetransmitTimeout,
  RecoveryComplete,
  SegmentValidated,
  StateClose,
  MetaRetransmitTimeout,
  SubflowReinject,
  SubflowJoin,
};

inline constexpr std::size_t kProbeEventKindCount = 11;

std::string_view to_string(ProbeEventKind k);

enum class SegmentClass : std::uint8_t { InOrder, Duplicate, OutOfOrder };

// Byte accounting of one validated segment. dup + in_order + ofo == len.
struct Classification {
  SegmentClass kind = SegmentClass::InOrder;
  std::uint64_t dup_bytes = 0;
  std::uint64_t in_order_bytes = 0;
  std::uint64_t ofo_bytes = 0;
  std::uint64_t distance = 0;  // OutOfOrder only

  friend bool operator==(const Classification&, const Classification&) = default;
};

struct SegmentDetail {
  std::uint64_t seq = 0;  // subflow/TCP sequence, or DSS for meta events
  std::uint64_t len = 0;
  Classification result;
};

struct TimerDetail {
  bool stalled = false;
  std::uint64_t retrans_bytes = 0;
};

struct CloseDetail {
  EndReason reason = EndReason::Other;
};

struct ConnectErrorDetail {
  int err = 0;
};

struct ReinjectDetail {
  std::uint64_t from_uid = 0;
  std::uint64_t bytes = 0;
};

struct JoinDetail {
  std::uint64_t meta_uid = 0;
};

using EventDetail = std::variant<std::monostate, SegmentDetail, TimerDetail,
                                 CloseDetail, ConnectErrorDetail,
                                 ReinjectDetail, JoinDetail>;

// Connection state read at the instant a probe fires.
struct StateCapture {
  KpiSnapshot kpis;
  std::uint64_t snd_nxt = 0;
  std::uint64_t rcv_nxt = 0;  // 32-bit sequence, or 64-bit DSS for meta
  double srtt_us = 0.0;
  double rttvar_us = 0.0;
  std::uint64_t segs_received = 0;
  bool ca_open = true;
  bool write_queue_pending = false;
};

struct ProbeEvent {
  ProbeEventKind kind = ProbeEventKind::ConnectAttempt;
  ConnKey key;
  std::optional<std::uint64_t> meta_uid;  // set on MPTCP subflows
  Timestamp at = 0;
  StateCapture capture;
  EventDetail detail;
};

}  // namespace kpiflow
