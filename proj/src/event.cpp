// SPDX-License-Identifier: Apache-2.0
#include "event.hpp"

namespace kpiflow {

std::string_view to_string(Transport t) {
  switch (t) {
    case Transport::Tcp: return "tcp";
    case Transport::MptcpSubflow: return "mptcp-subflow";
    case Transport::MptcpMeta: return "mptcp-meta";
  }
  return "?";
}

std::optional<Transport> transport_from_string(std::string_view s) {
  if (s == "tcp") return Transport::Tcp;
  if (s == "mptcp-subflow") return Transport::MptcpSubflow;
  if (s == "mptcp-meta") return Transport::MptcpMeta;
  return std::nullopt;
}

std::string_view to_string(EndReason r) {
  switch (r) {
    case EndReason::Finished: return "finished";
    case EndReason::Reset: return "reset";
    case EndReason::ConnectError: return "connect-error";
    case EndReason::Other: return "other";
  }
  return "?";
}

std::optional<EndReason> end_reason_from_string(std::string_view s) {
  if (s == "finished") return EndReason::Finished;
  if (s == "reset") return EndReason::Reset;
  if (s == "connect-error") return EndReason::ConnectError;
  if (s == "other") return EndReason::Other;
  return std::nullopt;
}

std::string_view to_string(ProbeEventKind k) {
  switch (k) {
    case ProbeEventKind::ConnectAttempt: return "ConnectAttempt";
    case ProbeEventKind::ConnectError: return "ConnectError";
    case ProbeEventKind::ConnectEstablished: return "ConnectEstablished";
    case ProbeEventKind::AcceptEstablished: return "AcceptEstablished";
    case ProbeEventKind::RetransmitTimeout: return "RetransmitTimeout";
    case ProbeEventKind::RecoveryComplete: return "RecoveryComplete";
    case ProbeEventKind::SegmentValidated: return "SegmentValidated";
    case ProbeEventKind::StateClose: return "StateClose";
    case ProbeEventKind::MetaRetransmitTimeout: return "MetaRetransmitTimeout";
    case ProbeEventKind::SubflowReinject: return "SubflowReinject";
    case ProbeEventKind::SubflowJoin: return "SubflowJoin";
  }
  return "?";
}

}  // namespace kpiflow
