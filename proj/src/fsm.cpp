// SPDX-License-Identifier: Apache-2.0
#include "fsm.hpp"

#include "error.hpp"

namespace kpiflow {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Init: return "init";
    case Phase::Connecting: return "connecting";
    case Phase::Established: return "established";
    case Phase::Lossy: return "lossy";
    case Phase::Closed: return "closed";
  }
  return "?";
}

std::optional<Phase> phase_from_string(std::string_view s) {
  for (auto p : {Phase::Init, Phase::Connecting, Phase::Established,
                 Phase::Lossy, Phase::Closed}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string LifecycleState::to_string() const {
  std::string out(kpiflow::to_string(phase));
  if (phase == Phase::Closed) {
    out += "(";
    out += kpiflow::to_string(end_reason);
    out += ")";
  }
  return out;
}

bool is_permitted_edge(const LifecycleState& from, const LifecycleState& to) {
  switch (from.phase) {
    case Phase::Init:
      return to.phase == Phase::Connecting || to.phase == Phase::Established;
    case Phase::Connecting:
      return to.phase == Phase::Established || to.phase == Phase::Closed;
    case Phase::Established:
      return to.phase == Phase::Lossy || to.phase == Phase::Closed;
    case Phase::Lossy:
      return to.phase == Phase::Established || to.phase == Phase::Closed;
    case Phase::Closed:
      return false;
  }
  return false;
}

namespace {

[[noreturn]] void illegal(const LifecycleState& s, const ProbeEvent& e) {
  throw Error(ErrorCode::IllegalTransition,
              std::string(to_string(e.kind)) + " in state " + s.to_string() +
                  " for connection " + std::to_string(e.key.uid));
}

EndReason close_reason(const ProbeEvent& e) {
  if (const auto* d = std::get_if<CloseDetail>(&e.detail)) return d->reason;
  return EndReason::Other;
}

bool stalled(const ProbeEvent& e) {
  if (const auto* d = std::get_if<TimerDetail>(&e.detail)) return d->stalled;
  return false;
}

}  // namespace

FsmStep apply_event(const LifecycleState& state, const ProbeEvent& event) {
  const auto stay = [&] { return FsmStep{state, std::nullopt}; };
  const auto move = [&](LifecycleState next) {
    return FsmStep{next, Transition{state, next, event.kind, event.at}};
  };

  switch (state.phase) {
    case Phase::Init:
      switch (event.kind) {
        case ProbeEventKind::ConnectAttempt:
          return FsmStep{LifecycleState::connecting(), std::nullopt};
        case ProbeEventKind::AcceptEstablished:
        case ProbeEventKind::SubflowJoin:
          return move(LifecycleState::established());
        default:
          illegal(state, event);
      }

    case Phase::Connecting:
      switch (event.kind) {
        // A lost SYN keeps the attempt alive; only the Stalls KPI moves.
        case ProbeEventKind::RetransmitTimeout:
          return stay();
        case ProbeEventKind::ConnectEstablished:
          return move(LifecycleState::established());
        case ProbeEventKind::ConnectError:
          return move(LifecycleState::closed(EndReason::ConnectError));
        case ProbeEventKind::StateClose:
          return move(LifecycleState::closed(close_reason(event)));
        default:
          illegal(state, event);
      }

    case Phase::Established:
      switch (event.kind) {
        case ProbeEventKind::SegmentValidated:
        case ProbeEventKind::SubflowReinject:
        case ProbeEventKind::RecoveryComplete:
          return stay();
        case ProbeEventKind::RetransmitTimeout:
          return stalled(event) ? move(LifecycleState::lossy()) : stay();
        case ProbeEventKind::MetaRetransmitTimeout:
          return move(LifecycleState::lossy());
        case ProbeEventKind::StateClose:
          return move(LifecycleState::closed(close_reason(event)));
        default:
          illegal(state, event);
      }

    case Phase::Lossy:
      switch (event.kind) {
        case ProbeEventKind::SegmentValidated:
        case ProbeEventKind::SubflowReinject:
        case ProbeEventKind::RetransmitTimeout:
        case ProbeEventKind::MetaRetransmitTimeout:
          return stay();
        case ProbeEventKind::RecoveryComplete:
          return move(LifecycleState::established());
        case ProbeEventKind::StateClose:
          return move(LifecycleState::closed(close_reason(event)));
        default:
          illegal(state, event);
      }

    case Phase::Closed:
      illegal(state, event);
  }
  illegal(state, event);
}

}  // namespace kpiflow
