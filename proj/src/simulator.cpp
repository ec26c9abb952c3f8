// SPDX-License-Identifier: Apache-2.0
#include "simulator.hpp"

#include <algorithm>

#include "error.hpp"

namespace kpiflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool data_phase(const LifecycleState& s) {
  return s.phase == Phase::Established || s.phase == Phase::Lossy;
}

EndReason reason_for(directive::CloseKind k) {
  switch (k) {
    case directive::CloseKind::Fin: return EndReason::Finished;
    case directive::CloseKind::Rst: return EndReason::Reset;
    case directive::CloseKind::Drop: return EndReason::Other;
  }
  return EndReason::Other;
}

}  // namespace

Simulator::Simulator(SimConfig config, EventSink sink)
    : config_(config),
      sink_(std::move(sink)),
      ancillary_(config.ancillary_capacity),
      next_auto_uid_(config.first_auto_uid) {}

const TcpConnState* Simulator::tcp_state(std::uint64_t uid) const {
  auto it = conns_.find(uid);
  return it == conns_.end() ? nullptr : &it->second.tcp;
}

const MetaConnState* Simulator::meta_state(std::uint64_t uid) const {
  auto it = metas_.find(uid);
  return it == metas_.end() ? nullptr : &it->second.state;
}

std::optional<LifecycleState> Simulator::lifecycle(std::uint64_t uid) const {
  if (auto it = conns_.find(uid); it != conns_.end()) return it->second.life;
  if (auto it = metas_.find(uid); it != metas_.end()) return it->second.life;
  return std::nullopt;
}

void Simulator::violation(const Directive& d, const std::string& msg) const {
  throw Error(ErrorCode::SimViolation, "line " + std::to_string(d.line) + ": connection " +
                                           std::to_string(d.uid) + ": " + msg);
}

void Simulator::claim_uid(const Directive& d, std::uint64_t uid) {
  if (!used_uids_.insert(uid).second)
    violation(d, "uid " + std::to_string(uid) + " is already in use");
}

Simulator::Connection& Simulator::live_conn(const Directive& d) {
  auto it = conns_.find(d.uid);
  if (it == conns_.end()) {
    if (metas_.contains(d.uid)) violation(d, "directive does not apply to a meta-socket");
    violation(d, "connection was never opened");
  }
  if (it->second.life.is_closed()) violation(d, "connection is closed");
  return it->second;
}

Simulator::Meta* Simulator::find_live_meta(std::uint64_t uid) {
  auto it = metas_.find(uid);
  if (it == metas_.end() || it->second.life.is_closed()) return nullptr;
  return &it->second;
}

Simulator::Meta& Simulator::resolve_meta(const Directive& d) {
  if (auto* m = find_live_meta(d.uid)) return *m;
  if (auto it = conns_.find(d.uid); it != conns_.end() && it->second.meta_uid) {
    if (auto* m = find_live_meta(*it->second.meta_uid)) return *m;
  }
  violation(d, "no live MPTCP meta-socket");
}

void Simulator::emit(ProbeEvent ev, LifecycleState& life, AncillaryState* anc) {
  const FsmStep step = apply_event(life, ev);
  if (anc) {
    sink_(ev);
    ++summary_.events_emitted;
    if (step.exported) anc->kpis.reset_window();
  }
  life = step.next;
}

void Simulator::emit_conn(Connection& c, ProbeEventKind kind, Timestamp at, EventDetail detail) {
  auto* anc = ancillary_.find(c.tcp.key.uid);
  ProbeEvent ev;
  ev.kind = kind;
  ev.key = c.tcp.key;
  ev.meta_uid = c.meta_uid;
  ev.at = at;
  ev.capture = capture(c.tcp, anc, at);
  ev.detail = std::move(detail);
  emit(std::move(ev), c.life, anc);
}

void Simulator::emit_meta(Meta& m, ProbeEventKind kind, Timestamp at, EventDetail detail) {
  auto* anc = ancillary_.find(m.state.key.uid);
  ProbeEvent ev;
  ev.kind = kind;
  ev.key = m.state.key;
  ev.at = at;
  ev.capture = capture(m.state, anc, at);
  ev.detail = std::move(detail);
  emit(std::move(ev), m.life, anc);
}

void Simulator::close_conn(Connection& c, EndReason reason, Timestamp at) {
  if (reason == EndReason::Finished) {
    c.tcp.fin_sent_acked = true;
    c.tcp.fin_received = true;
  }
  emit_conn(c, ProbeEventKind::StateClose, at, CloseDetail{reason});
  ancillary_.purge(c.tcp.key.uid);
  if (!c.meta_uid) return;
  if (auto* m = find_live_meta(*c.meta_uid)) {
    m->state.live_subflow_uids.erase(c.tcp.key.uid);
    // A meta-socket never outlives its last subflow.
    if (m->state.live_subflow_uids.empty()) close_meta(*m, reason, at);
  }
}

void Simulator::close_meta(Meta& m, EndReason reason, Timestamp at) {
  const auto subflows = m.state.live_subflow_uids;
  m.state.live_subflow_uids.clear();
  for (auto uid : subflows) {
    auto& c = conns_.at(uid);
    if (!c.life.is_closed()) {
      if (reason == EndReason::Finished) {
        c.tcp.fin_sent_acked = true;
        c.tcp.fin_received = true;
      }
      emit_conn(c, ProbeEventKind::StateClose, at, CloseDetail{reason});
      ancillary_.purge(uid);
    }
  }
  emit_meta(m, ProbeEventKind::StateClose, at, CloseDetail{reason});
  ancillary_.purge(m.state.key.uid);
}

void Simulator::apply(const Directive& d) {
  try {
    std::visit(overloaded{
                   [&](const directive::Open& o) { on_open(d, o); },
                   [&](const directive::Accepted& a) { on_accepted(d, a); },
                   [&](const directive::ConnectError& e) { on_connect_error(d, e); },
                   [&](const directive::Established& e) { on_established(d, e); },
                   [&](const directive::Send& s) { on_send(d, s); },
                   [&](const directive::Recv& r) { on_recv(d, r); },
                   [&](const directive::RttSample& r) { on_rtt_sample(d, r); },
                   [&](const directive::Rto& r) { on_rto(d, r); },
                   [&](const directive::Recovered&) { on_recovered(d); },
                   [&](const directive::Corrupt& c) { on_corrupt(d, c); },
                   [&](const directive::Close& c) { on_close(d, c); },
                   [&](const directive::Join& j) { on_join(d, j); },
                   [&](const directive::Reinject& r) { on_reinject(d, r); },
                   [&](const directive::MetaRto&) { on_meta_rto(d); },
               },
               d.body);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IllegalTransition)
      throw Error(ErrorCode::SimViolation, "line " + std::to_string(d.line) + ": " + e.what());
    if (e.code() == ErrorCode::UnknownSubflow || e.code() == ErrorCode::InvalidArgument)
      throw Error(e.code(), "line " + std::to_string(d.line) + ": " + e.what());
    throw;
  }
  ++summary_.directives_applied;
  summary_.refused_registrations = ancillary_.refused();
}

void Simulator::on_open(const Directive& d, const directive::Open& o) {
  claim_uid(d, d.uid);
  Connection c;
  c.tcp.key = ConnKey{o.path.src, o.path.dst, Transport::Tcp, o.path.iface, d.uid};
  c.mptcp_requested = o.mptcp;
  c.opened_at = d.at;
  ancillary_.register_connection(d.uid, tcp_kpis());
  ++summary_.connections_seen;
  auto& conn = conns_.emplace(d.uid, std::move(c)).first->second;
  emit_conn(conn, ProbeEventKind::ConnectAttempt, d.at);
}

void Simulator::on_accepted(const Directive& d, const directive::Accepted& a) {
  claim_uid(d, d.uid);
  Connection c;
  PathSpec path;
  if (a.path) {
    path = *a.path;
  } else {
    path.src = Endpoint{*IpAddress::parse("0.0.0.0"), 0};
    path.dst = path.src;
  }
  c.tcp.key = ConnKey{path.src, path.dst, Transport::Tcp, path.iface, d.uid};
  c.opened_at = d.at;
  // Inbound connections only become visible once user-space accepts them.
  ancillary_.register_connection(d.uid, tcp_kpis());
  ++summary_.connections_seen;
  auto& conn = conns_.emplace(d.uid, std::move(c)).first->second;
  emit_conn(conn, ProbeEventKind::AcceptEstablished, d.at);
}

void Simulator::on_connect_error(const Directive& d, const directive::ConnectError& e) {
  auto& c = live_conn(d);
  if (c.life.phase != Phase::Connecting) violation(d, "connect error outside connection setup");
  emit_conn(c, ProbeEventKind::ConnectError, d.at, ConnectErrorDetail{e.err});
  ancillary_.purge(d.uid);
}

void Simulator::on_established(const Directive& d, const directive::Established& e) {
  auto& c = live_conn(d);
  if (c.life.phase != Phase::Connecting) violation(d, "established outside connection setup");
  if (e.meta_uid && !c.mptcp_requested) violation(d, "meta= requires an mptcp open");
  auto* anc = ancillary_.find(d.uid);
  update_rtt(c.tcp, anc, e.rtt_us);
  c.tcp.ca_open = true;
  c.tcp.write_queue_pending = false;

  if (!c.mptcp_requested) {
    emit_conn(c, ProbeEventKind::ConnectEstablished, d.at);
    return;
  }

  // MP_CAPABLE is only known at SYN+ACK: the attempt becomes the first
  // subflow and a meta-socket appears alongside it.
  std::uint64_t meta_uid = 0;
  if (e.meta_uid) {
    meta_uid = *e.meta_uid;
  } else {
    while (used_uids_.contains(next_auto_uid_)) ++next_auto_uid_;
    meta_uid = next_auto_uid_++;
  }
  claim_uid(d, meta_uid);
  c.tcp.key.transport = Transport::MptcpSubflow;
  c.meta_uid = meta_uid;
  if (anc) anc->kpis.enable(KpiId::Reinjections);
  emit_conn(c, ProbeEventKind::ConnectEstablished, d.at);

  Meta m;
  m.state.key = c.tcp.key;
  m.state.key.transport = Transport::MptcpMeta;
  m.state.key.uid = meta_uid;
  m.state.subflow_uids = {d.uid};
  m.state.live_subflow_uids = {d.uid};
  ancillary_.register_connection(meta_uid, meta_kpis());
  ++summary_.connections_seen;
  auto& meta = metas_.emplace(meta_uid, std::move(m)).first->second;
  emit_meta(meta, ProbeEventKind::ConnectAttempt, c.opened_at);
  emit_meta(meta, ProbeEventKind::ConnectEstablished, d.at);
}

void Simulator::on_send(const Directive& d, const directive::Send& s) {
  auto& c = live_conn(d);
  if (!data_phase(c.life)) violation(d, "send before establishment");
  const auto segs = segments_for(s.len, config_.mss);
  c.tcp.snd_nxt = static_cast<std::uint32_t>(c.tcp.snd_nxt + s.len);
  c.tcp.bytes_sent += s.len;
  c.tcp.segs_sent += segs;
  c.tcp.write_queue_pending = true;
  if (auto* anc = ancillary_.find(d.uid)) anc->kpis.record_counter(KpiId::Sent, s.len, segs);
  if (c.meta_uid) {
    if (auto* m = find_live_meta(*c.meta_uid)) {
      m->state.bytes_sent += s.len;
      if (auto* manc = ancillary_.find(*c.meta_uid))
        manc->kpis.record_counter(KpiId::Sent, s.len, segs);
    }
  }
}

void Simulator::on_recv(const Directive& d, const directive::Recv& r) {
  auto& c = live_conn(d);
  if (!data_phase(c.life)) violation(d, "data received before establishment");
  if (r.dss && !c.meta_uid) violation(d, "dss= requires an MPTCP subflow");
  std::vector<Delivered> delivered;
  const auto cls = validate_incoming(c.tcp, ancillary_.find(d.uid), r.seq, r.len, r.dss, &delivered);
  emit_conn(c, ProbeEventKind::SegmentValidated, d.at, SegmentDetail{r.seq, r.len, cls});
  if (!c.meta_uid) return;
  auto* m = find_live_meta(*c.meta_uid);
  if (!m || !data_phase(m->life)) return;
  auto* manc = ancillary_.find(*c.meta_uid);
  for (const auto& chunk : delivered) {
    if (!chunk.dss) continue;
    const auto mcls = meta_validate_incoming(m->state, manc, *chunk.dss, chunk.bytes);
    emit_meta(*m, ProbeEventKind::SegmentValidated, d.at,
              SegmentDetail{*chunk.dss, chunk.bytes, mcls});
  }
}

void Simulator::on_rtt_sample(const Directive& d, const directive::RttSample& r) {
  auto& c = live_conn(d);
  if (!data_phase(c.life)) violation(d, "RTT sample before establishment");
  update_rtt(c.tcp, ancillary_.find(d.uid), r.us);
  // An RTT measurement comes from an ACK covering everything outstanding.
  c.tcp.write_queue_pending = false;
}

void Simulator::on_rto(const Directive& d, const directive::Rto& r) {
  auto& c = live_conn(d);
  auto* anc = ancillary_.find(d.uid);
  auto ev = fire_retransmit_timer(c.tcp, anc, c.life, r.retrans, d.at, config_.mss);
  ev.meta_uid = c.meta_uid;
  emit(std::move(ev), c.life, anc);
}

void Simulator::on_recovered(const Directive& d) {
  if (metas_.contains(d.uid)) {
    auto* m = find_live_meta(d.uid);
    if (!m || !data_phase(m->life)) violation(d, "meta-socket is not established");
    m->state.ca_open = true;
    emit_meta(*m, ProbeEventKind::RecoveryComplete, d.at);
    return;
  }
  auto& c = live_conn(d);
  if (!data_phase(c.life)) violation(d, "recovery before establishment");
  c.tcp.ca_open = true;
  c.tcp.write_queue_pending = false;
  emit_conn(c, ProbeEventKind::RecoveryComplete, d.at);
}

void Simulator::on_corrupt(const Directive& d, const directive::Corrupt& cr) {
  (void)live_conn(d);
  if (auto* anc = ancillary_.find(d.uid)) anc->kpis.record_counter(KpiId::Errors, cr.len, 1);
}

void Simulator::on_close(const Directive& d, const directive::Close& cl) {
  const auto reason = reason_for(cl.kind);
  if (metas_.contains(d.uid)) {
    auto* m = find_live_meta(d.uid);
    if (!m) violation(d, "meta-socket is closed");
    close_meta(*m, reason, d.at);
    return;
  }
  auto& c = live_conn(d);
  if (reason == EndReason::Finished && !data_phase(c.life))
    violation(d, "FIN exchange requires an established connection");
  close_conn(c, reason, d.at);
}

void Simulator::on_join(const Directive& d, const directive::Join& j) {
  auto& m = resolve_meta(d);
  if (!data_phase(m.life)) violation(d, "join on a meta-socket that is not established");
  claim_uid(d, j.subflow_uid);
  Connection c;
  if (j.path) {
    c.tcp.key = ConnKey{j.path->src, j.path->dst, Transport::MptcpSubflow, j.path->iface,
                        j.subflow_uid};
  } else {
    c.tcp.key = m.state.key;
    c.tcp.key.transport = Transport::MptcpSubflow;
    c.tcp.key.uid = j.subflow_uid;
  }
  c.meta_uid = m.state.key.uid;
  c.opened_at = d.at;
  ancillary_.register_connection(j.subflow_uid, subflow_kpis());
  ++summary_.connections_seen;
  m.state.subflow_uids.insert(j.subflow_uid);
  m.state.live_subflow_uids.insert(j.subflow_uid);
  auto& conn = conns_.emplace(j.subflow_uid, std::move(c)).first->second;
  emit_conn(conn, ProbeEventKind::SubflowJoin, d.at, JoinDetail{m.state.key.uid});
}

void Simulator::on_reinject(const Directive& d, const directive::Reinject& r) {
  auto& c = live_conn(d);
  if (!data_phase(c.life)) violation(d, "reinjection before establishment");
  if (!c.meta_uid)
    throw Error(ErrorCode::UnknownSubflow, "connection " + std::to_string(d.uid) + " is not an MPTCP subflow");
  auto* m = find_live_meta(*c.meta_uid);
  if (!m) violation(d, "meta-socket is closed");
  reinject(m->state, c.tcp, ancillary_.find(d.uid), r.from_uid, r.bytes, config_.mss);
  emit_conn(c, ProbeEventKind::SubflowReinject, d.at, ReinjectDetail{r.from_uid, r.bytes});
}

void Simulator::on_meta_rto(const Directive& d) {
  auto& m = resolve_meta(d);
  if (!data_phase(m.life)) violation(d, "meta timeout on a meta-socket that is not established");
  auto* anc = ancillary_.find(m.state.key.uid);
  emit(meta_rto(m.state, anc, d.at), m.life, anc);
}

void Simulator::finish(Timestamp at) {
  for (auto& [uid, m] : metas_) {
    if (!m.life.is_closed()) close_meta(m, EndReason::Other, at);
  }
  for (auto& [uid, c] : conns_) {
    if (!c.life.is_closed()) close_conn(c, EndReason::Other, at);
  }
}

ReplaySummary replay(const TraceScript& script, const EventSink& sink, SimConfig config) {
  config.first_auto_uid = script.max_uid() + 1;
  Simulator sim(config, sink);
  for (const auto& d : script.directives) sim.apply(d);
  if (!script.directives.empty()) sim.finish(script.directives.back().at);
  return sim.summary();
}

}  // namespace kpiflow
