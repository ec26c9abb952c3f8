// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "fsm.hpp"
#include "mptcp.hpp"
#include "tcp_sim.hpp"
#include "trace.hpp"

namespace kpiflow {

struct SimConfig {
  std::size_t ancillary_capacity = AncillaryTable::kDefaultCapacity;
  std::uint32_t mss = kDefaultMss;
  // First uid handed to meta-sockets whose uid the script leaves implicit.
  // replay() sets this past the script's largest uid.
  std::uint64_t first_auto_uid = 1ull << 32;
};

struct ReplaySummary {
  std::uint64_t connections_seen = 0;
  std::uint64_t events_emitted = 0;
  std::uint64_t directives_applied = 0;
  std::uint64_t refused_registrations = 0;
};

using EventSink = std::function<void(const ProbeEvent&)>;

// Deterministic multi-connection TCP/MPTCP simulator. Directives are applied
// one at a time; every probe crossed is handed to the sink before apply()
// returns. Connections without ancillary state (refused at registration)
// are simulated but not instrumented.
class Simulator {
 public:
  Simulator(SimConfig config, EventSink sink);

  // Throws SimViolation (or UnknownSubflow) when the directive is illegal
  // for the connection's state.
  void apply(const Directive& d);

  // Tears down every live connection with EndReason::Other at `at`.
  void finish(Timestamp at);

  const ReplaySummary& summary() const { return summary_; }

  bool has_ancillary(std::uint64_t uid) const { return ancillary_.find(uid) != nullptr; }
  const AncillaryState* ancillary(std::uint64_t uid) const { return ancillary_.find(uid); }
  const AncillaryTable& ancillary_table() const { return ancillary_; }
  const TcpConnState* tcp_state(std::uint64_t uid) const;
  const MetaConnState* meta_state(std::uint64_t uid) const;
  std::optional<LifecycleState> lifecycle(std::uint64_t uid) const;

 private:
  struct Connection {
    TcpConnState tcp;
    LifecycleState life;
    bool mptcp_requested = false;
    std::optional<std::uint64_t> meta_uid;
    Timestamp opened_at = 0;
  };
  struct Meta {
    MetaConnState state;
    LifecycleState life;
  };

  [[noreturn]] void violation(const Directive& d, const std::string& msg) const;

  Connection& live_conn(const Directive& d);
  Meta* find_live_meta(std::uint64_t uid);
  Meta& resolve_meta(const Directive& d);
  void claim_uid(const Directive& d, std::uint64_t uid);

  void emit(ProbeEvent ev, LifecycleState& life, AncillaryState* anc);
  void emit_conn(Connection& c, ProbeEventKind kind, Timestamp at, EventDetail detail = {});
  void emit_meta(Meta& m, ProbeEventKind kind, Timestamp at, EventDetail detail = {});

  void close_conn(Connection& c, EndReason reason, Timestamp at);
  void close_meta(Meta& m, EndReason reason, Timestamp at);

  void on_open(const Directive& d, const directive::Open& o);
  void on_accepted(const Directive& d, const directive::Accepted& a);
  void on_connect_error(const Directive& d, const directive::ConnectError& e);
  void on_established(const Directive& d, const directive::Established& e);
  void on_send(const Directive& d, const directive::Send& s);
  void on_recv(const Directive& d, const directive::Recv& r);
  void on_rtt_sample(const Directive& d, const directive::RttSample& r);
  void on_rto(const Directive& d, const directive::Rto& r);
  void on_recovered(const Directive& d);
  void on_corrupt(const Directive& d, const directive::Corrupt& c);
  void on_close(const Directive& d, const directive::Close& c);
  void on_join(const Directive& d, const directive::Join& j);
  void on_reinject(const Directive& d, const directive::Reinject& r);
  void on_meta_rto(const Directive& d);

  SimConfig config_;
  EventSink sink_;
  AncillaryTable ancillary_;
  std::map<std::uint64_t, Connection> conns_;
  std::map<std::uint64_t, Meta> metas_;
  std::set<std::uint64_t> used_uids_;
  std::uint64_t next_auto_uid_;
  ReplaySummary summary_;
};

// Replays the whole script, then tears down whatever is still open at the
// last directive's timestamp.
ReplaySummary replay(const TraceScript& script, const EventSink& sink,
                     SimConfig config = {});

}  // namespace kpiflow
