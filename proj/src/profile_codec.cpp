// SPDX-License-Identifier: Apache-2.0
#include "profile_codec.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <set>

#include "error.hpp"

namespace kpiflow {

namespace {

enum Ie : std::uint16_t {
  // IANA
  kSourceIPv4Address = 8,
  kDestinationIPv4Address = 12,
  kSourceIPv6Address = 27,
  kDestinationIPv6Address = 28,
  kSourceTransportPort = 7,
  kDestinationTransportPort = 11,
  kInterfaceName = 82,
};

enum Pe : std::uint16_t {
  kConnectionUid = 1,
  kMetaUid,
  kTransportKind,
  kFromState,
  kToState,
  kEndReason,
  kWindowStartNs,
  kWindowEndNs,
  kExportSeq,
  kSentBytes,
  kSentPackets,
  kReceivedBytes,
  kReceivedPackets,
  kLostBytes,
  kLostPackets,
  kErrorBytes,
  kErrorPackets,
  kDuplicateBytes,
  kDuplicatePackets,
  kOfoBytes,
  kOfoPackets,
  kRttCount,
  kRttMean,
  kRttVariance,
  kOfoDistCount,
  kOfoDistMean,
  kOfoDistVariance,
  kStalls,
  kReinjections,
  kHolBlocking,
};

constexpr std::size_t kIfaceFieldLength = 16;

constexpr std::array<IeInfo, 37> kRegistry{{
    {"sourceIPv4Address", kSourceIPv4Address, false, 4, "Connection source address (IPv4)"},
    {"destinationIPv4Address", kDestinationIPv4Address, false, 4, "Connection destination address (IPv4)"},
    {"sourceIPv6Address", kSourceIPv6Address, false, 16, "Connection source address (IPv6)"},
    {"destinationIPv6Address", kDestinationIPv6Address, false, 16, "Connection destination address (IPv6)"},
    {"sourceTransportPort", kSourceTransportPort, false, 2, "Connection source port"},
    {"destinationTransportPort", kDestinationTransportPort, false, 2, "Connection destination port"},
    {"interfaceName", kInterfaceName, false, 16, "Outgoing interface, NUL padded"},
    {"connectionUid", kConnectionUid, true, 8, "Host-unique connection identifier"},
    {"metaUid", kMetaUid, true, 8, "Owning MPTCP meta-socket (subflows only)"},
    {"transportKind", kTransportKind, true, 1, "0 tcp, 1 mptcp subflow, 2 mptcp meta-socket"},
    {"fromState", kFromState, true, 1, "Lifecycle state at window start (0 init .. 4 closed)"},
    {"toState", kToState, true, 1, "Lifecycle state at window end (0 init .. 4 closed)"},
    {"endReason", kEndReason, true, 1, "0 none, 1 finished, 2 reset, 3 connect-error, 4 other"},
    {"windowStartNs", kWindowStartNs, true, 8, "Window start, trace-relative nanoseconds"},
    {"windowEndNs", kWindowEndNs, true, 8, "Window end, trace-relative nanoseconds"},
    {"exportSeq", kExportSeq, true, 4, "Per-connection profile ordinal, from 1"},
    {"sentBytes", kSentBytes, true, 8, "Bytes sent in window"},
    {"sentPackets", kSentPackets, true, 8, "Segments sent in window"},
    {"receivedBytes", kReceivedBytes, true, 8, "In-order bytes received in window"},
    {"receivedPackets", kReceivedPackets, true, 8, "Segments delivering in-order data in window"},
    {"lostBytes", kLostBytes, true, 8, "Bytes retransmitted after timer expiry in window"},
    {"lostPackets", kLostPackets, true, 8, "Segments retransmitted after timer expiry in window"},
    {"errorBytes", kErrorBytes, true, 8, "Bytes of corrupted segments in window"},
    {"errorPackets", kErrorPackets, true, 8, "Corrupted segments in window"},
    {"duplicateBytes", kDuplicateBytes, true, 8, "Already acknowledged bytes received in window"},
    {"duplicatePackets", kDuplicatePackets, true, 8, "Segments carrying duplicate bytes in window"},
    {"ofoBytes", kOfoBytes, true, 8, "Out-of-order bytes received in window"},
    {"ofoPackets", kOfoPackets, true, 8, "Out-of-order segments received in window"},
    {"rttCount", kRttCount, true, 8, "RTT samples in window"},
    {"rttMeanUs", kRttMean, true, 8, "Mean RTT in window, microseconds"},
    {"rttVarianceUs2", kRttVariance, true, 8, "RTT variance in window, squared microseconds"},
    {"ofoDistCount", kOfoDistCount, true, 8, "Out-of-order distance samples in window"},
    {"ofoDistMeanBytes", kOfoDistMean, true, 8, "Mean out-of-order distance in window, bytes"},
    {"ofoDistVarianceBytes2", kOfoDistVariance, true, 8, "Out-of-order distance variance, squared bytes"},
    {"stallCount", kStalls, true, 8, "Retransmission timeouts with a blocked sender in window"},
    {"reinjectionCount", kReinjections, true, 8, "MPTCP reinjections onto this subflow in window"},
    {"holBlockingCount", kHolBlocking, true, 8, "Meta-socket retransmission timeouts in window"},
}};

std::vector<std::uint16_t> key_fields(bool v6) {
  if (v6)
    return {kSourceIPv6Address, kDestinationIPv6Address, kSourceTransportPort,
            kDestinationTransportPort, kInterfaceName};
  return {kSourceIPv4Address, kDestinationIPv4Address, kSourceTransportPort,
          kDestinationTransportPort, kInterfaceName};
}

std::vector<std::uint16_t> enterprise_fields(bool meta) {
  if (meta)
    return {kConnectionUid, kTransportKind, kFromState, kToState, kEndReason, kWindowStartNs,
            kWindowEndNs, kExportSeq, kSentBytes, kSentPackets, kReceivedBytes,
            kReceivedPackets, kLostBytes, kLostPackets, kDuplicateBytes, kDuplicatePackets,
            kOfoBytes, kOfoPackets, kOfoDistCount, kOfoDistMean, kOfoDistVariance,
            kHolBlocking};
  return {kConnectionUid, kMetaUid, kTransportKind, kFromState, kToState, kEndReason,
          kWindowStartNs, kWindowEndNs, kExportSeq, kSentBytes, kSentPackets, kReceivedBytes,
          kReceivedPackets, kLostBytes, kLostPackets, kErrorBytes, kErrorPackets,
          kDuplicateBytes, kDuplicatePackets, kOfoBytes, kOfoPackets, kRttCount, kRttMean,
          kRttVariance, kOfoDistCount, kOfoDistMean, kOfoDistVariance, kStalls, kReinjections};
}

void put_uint(ipfix::Bytes& out, std::uint64_t v, std::size_t len) {
  for (std::size_t i = len; i-- > 0;) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_uint(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (auto byte : b) v = (v << 8) | byte;
  return v;
}

std::uint64_t enterprise_value(const PerformanceProfile& p, std::uint16_t id) {
  const auto& k = p.kpis;
  const auto rtt = k.rtt.value_or(WindowStat{});
  switch (id) {
    case kConnectionUid: return p.key.uid;
    case kMetaUid: return p.meta_uid.value_or(0);
    case kTransportKind: return static_cast<std::uint64_t>(p.key.transport);
    case kFromState: return static_cast<std::uint64_t>(p.from.phase);
    case kToState: return static_cast<std::uint64_t>(p.to.phase);
    case kEndReason: return p.to.is_closed() ? static_cast<std::uint64_t>(p.to.end_reason) : 0;
    case kWindowStartNs: return p.t_start;
    case kWindowEndNs: return p.t_end;
    case kExportSeq: return p.export_seq;
    case kSentBytes: return k.sent.bytes;
    case kSentPackets: return k.sent.packets;
    case kReceivedBytes: return k.received.bytes;
    case kReceivedPackets: return k.received.packets;
    case kLostBytes: return k.lost.bytes;
    case kLostPackets: return k.lost.packets;
    case kErrorBytes: return k.errors.value_or(CounterPair{}).bytes;
    case kErrorPackets: return k.errors.value_or(CounterPair{}).packets;
    case kDuplicateBytes: return k.duplicates.bytes;
    case kDuplicatePackets: return k.duplicates.packets;
    case kOfoBytes: return k.ofo.bytes;
    case kOfoPackets: return k.ofo.packets;
    case kRttCount: return rtt.count;
    case kRttMean: return rtt.mean;
    case kRttVariance: return rtt.variance;
    case kOfoDistCount: return k.ofo_dist.count;
    case kOfoDistMean: return k.ofo_dist.mean;
    case kOfoDistVariance: return k.ofo_dist.variance;
    case kStalls: return k.stalls.value_or(0);
    case kReinjections: return k.reinjections.value_or(0);
    case kHolBlocking: return k.hol_blocking.value_or(0);
  }
  return 0;
}

LifecycleState state_from(std::uint64_t phase) {
  if (phase > static_cast<std::uint64_t>(Phase::Closed))
    throw Error(ErrorCode::MalformedMessage, "lifecycle state " + std::to_string(phase));
  return LifecycleState{static_cast<Phase>(phase)};
}

}  // namespace

std::span<const IeInfo> ie_registry() { return kRegistry; }

const IeInfo* find_ie(std::uint16_t element_id, bool enterprise) {
  for (const auto& ie : kRegistry)
    if (ie.element_id == element_id && ie.enterprise == enterprise) return &ie;
  return nullptr;
}

std::string registry_csv(std::uint32_t pen) {
  std::string out = "name,element_id,pen,length,description\n";
  for (const auto& ie : kRegistry) {
    out += std::string(ie.name) + "," + std::to_string(ie.element_id) + "," +
           (ie.enterprise ? std::to_string(pen) : std::string()) + "," +
           std::to_string(ie.length) + "," + std::string(ie.description) + "\n";
  }
  return out;
}

ipfix::TemplateRecord profile_template(std::uint16_t id, std::uint32_t pen) {
  if (id < kTemplateTcpV4 || id > kTemplateMetaV6)
    throw Error(ErrorCode::UnknownTemplate, "no profile template " + std::to_string(id));
  const bool v6 = id == kTemplateTcpV6 || id == kTemplateMetaV6;
  const bool meta = id == kTemplateMetaV4 || id == kTemplateMetaV6;
  ipfix::TemplateRecord t{id, {}};
  for (auto e : key_fields(v6)) t.fields.push_back({e, find_ie(e, false)->length, std::nullopt});
  for (auto e : enterprise_fields(meta)) t.fields.push_back({e, find_ie(e, true)->length, pen});
  return t;
}

std::vector<ipfix::TemplateRecord> profile_templates(std::uint32_t pen) {
  return {profile_template(kTemplateTcpV4, pen), profile_template(kTemplateTcpV6, pen),
          profile_template(kTemplateMetaV4, pen), profile_template(kTemplateMetaV6, pen)};
}

std::uint16_t template_for(const PerformanceProfile& p) {
  const bool v6 = p.key.src.addr.family() == IpFamily::V6;
  if (p.key.transport == Transport::MptcpMeta) return v6 ? kTemplateMetaV6 : kTemplateMetaV4;
  return v6 ? kTemplateTcpV6 : kTemplateTcpV4;
}

ipfix::Bytes encode_profile(const PerformanceProfile& p, std::uint32_t pen) {
  if (p.key.src.addr.family() != p.key.dst.addr.family())
    throw Error(ErrorCode::InvalidArgument, "mixed address families in connection key");
  if (p.key.iface.size() > kMaxIfaceLength)
    throw Error(ErrorCode::InvalidArgument, "interface name longer than 15 characters");
  const auto tpl = profile_template(template_for(p), pen);
  ipfix::Bytes out;
  out.reserve(tpl.record_length());
  for (const auto& f : tpl.fields) {
    if (f.enterprise) {
      put_uint(out, enterprise_value(p, f.element_id), f.length);
      continue;
    }
    switch (f.element_id) {
      case kSourceIPv4Address:
      case kSourceIPv6Address:
        out.insert(out.end(), p.key.src.addr.data(), p.key.src.addr.data() + f.length);
        break;
      case kDestinationIPv4Address:
      case kDestinationIPv6Address:
        out.insert(out.end(), p.key.dst.addr.data(), p.key.dst.addr.data() + f.length);
        break;
      case kSourceTransportPort: put_uint(out, p.key.src.port, 2); break;
      case kDestinationTransportPort: put_uint(out, p.key.dst.port, 2); break;
      case kInterfaceName: {
        const std::size_t at = out.size();
        out.resize(at + kIfaceFieldLength, 0);
        std::memcpy(out.data() + at, p.key.iface.data(), p.key.iface.size());
        break;
      }
    }
  }
  return out;
}

PerformanceProfile decode_profile(const ipfix::TemplateRecord& tpl,
                                  std::span<const std::uint8_t> record, std::uint32_t pen) {
  if (record.size() != tpl.record_length())
    throw Error(ErrorCode::FieldLengthMismatch, "record length does not match template");
  PerformanceProfile p;
  std::set<std::uint16_t> seen;
  std::uint64_t end_reason = 0;
  WindowStat rtt;
  CounterPair errors;
  std::uint64_t stalls = 0, reinjections = 0, hol = 0;

  std::size_t pos = 0;
  for (const auto& f : tpl.fields) {
    const auto value = record.subspan(pos, f.length);
    pos += f.length;
    if (f.enterprise && *f.enterprise != pen) continue;
    const IeInfo* ie = find_ie(f.element_id, f.enterprise.has_value());
    if (!ie) continue;
    if (ie->length != f.length)
      throw Error(ErrorCode::FieldLengthMismatch,
                  std::string(ie->name) + " carried in " + std::to_string(f.length) + " bytes");
    if (!f.enterprise) {
      switch (f.element_id) {
        case kSourceIPv4Address:
          p.key.src.addr = IpAddress::v4({value[0], value[1], value[2], value[3]});
          break;
        case kDestinationIPv4Address:
          p.key.dst.addr = IpAddress::v4({value[0], value[1], value[2], value[3]});
          break;
        case kSourceIPv6Address:
        case kDestinationIPv6Address: {
          std::array<std::uint8_t, 16> a{};
          std::copy(value.begin(), value.end(), a.begin());
          (f.element_id == kSourceIPv6Address ? p.key.src : p.key.dst).addr = IpAddress::v6(a);
          break;
        }
        case kSourceTransportPort: p.key.src.port = static_cast<std::uint16_t>(get_uint(value)); break;
        case kDestinationTransportPort: p.key.dst.port = static_cast<std::uint16_t>(get_uint(value)); break;
        case kInterfaceName: {
          const auto end = std::find(value.begin(), value.end(), 0);
          p.key.iface.assign(value.begin(), end);
          if (p.key.iface.size() > kMaxIfaceLength) p.key.iface.resize(kMaxIfaceLength);
          break;
        }
      }
      continue;
    }
    seen.insert(f.element_id);
    const std::uint64_t v = get_uint(value);
    auto& k = p.kpis;
    switch (f.element_id) {
      case kConnectionUid: p.key.uid = v; break;
      case kMetaUid: p.meta_uid = v; break;
      case kTransportKind:
        if (v > static_cast<std::uint64_t>(Transport::MptcpMeta))
          throw Error(ErrorCode::MalformedMessage, "transport kind " + std::to_string(v));
        p.key.transport = static_cast<Transport>(v);
        break;
      case kFromState: p.from = state_from(v); break;
      case kToState: p.to = state_from(v); break;
      case kEndReason: end_reason = v; break;
      case kWindowStartNs: p.t_start = v; break;
      case kWindowEndNs: p.t_end = v; break;
      case kExportSeq: p.export_seq = static_cast<std::uint32_t>(v); break;
      case kSentBytes: k.sent.bytes = v; break;
      case kSentPackets: k.sent.packets = v; break;
      case kReceivedBytes: k.received.bytes = v; break;
      case kReceivedPackets: k.received.packets = v; break;
      case kLostBytes: k.lost.bytes = v; break;
      case kLostPackets: k.lost.packets = v; break;
      case kErrorBytes: errors.bytes = v; break;
      case kErrorPackets: errors.packets = v; break;
      case kDuplicateBytes: k.duplicates.bytes = v; break;
      case kDuplicatePackets: k.duplicates.packets = v; break;
      case kOfoBytes: k.ofo.bytes = v; break;
      case kOfoPackets: k.ofo.packets = v; break;
      case kRttCount: rtt.count = v; break;
      case kRttMean: rtt.mean = v; break;
      case kRttVariance: rtt.variance = v; break;
      case kOfoDistCount: k.ofo_dist.count = v; break;
      case kOfoDistMean: k.ofo_dist.mean = v; break;
      case kOfoDistVariance: k.ofo_dist.variance = v; break;
      case kStalls: stalls = v; break;
      case kReinjections: reinjections = v; break;
      case kHolBlocking: hol = v; break;
    }
  }

  if (p.to.is_closed()) {
    if (end_reason < 1 || end_reason > static_cast<std::uint64_t>(EndReason::Other))
      throw Error(ErrorCode::MalformedMessage, "closed profile without a valid end reason");
    p.to.end_reason = static_cast<EndReason>(end_reason);
  }

  const auto t = p.key.transport;
  const bool meta = t == Transport::MptcpMeta;
  const bool subflow = t == Transport::MptcpSubflow;
  if (!subflow) p.meta_uid.reset();
  if (!meta && seen.contains(kErrorBytes)) p.kpis.errors = errors;
  if (!meta && seen.contains(kRttCount)) p.kpis.rtt = rtt;
  if (!meta && seen.contains(kStalls)) p.kpis.stalls = stalls;
  if (subflow && seen.contains(kReinjections)) p.kpis.reinjections = reinjections;
  if (meta && seen.contains(kHolBlocking)) p.kpis.hol_blocking = hol;
  return p;
}

}  // namespace kpiflow
