// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "event.hpp"

namespace kpiflow {

enum class Phase : std::uint8_t { Init = 0, Connecting = 1, Established = 2, Lossy = 3, Closed = 4 };

std::string_view to_string(Phase p);
std::optional<Phase> phase_from_string(std::string_view s);

// Abstract connection lifecycle. `end_reason` is meaningful only when Closed.
struct LifecycleState {
  Phase phase = Phase::Init;
  EndReason end_reason = EndReason::Other;

  static LifecycleState init() { return {}; }
  static LifecycleState connecting() { return {Phase::Connecting}; }
  static LifecycleState established() { return {Phase::Established}; }
  static LifecycleState lossy() { return {Phase::Lossy}; }
  static LifecycleState closed(EndReason r) { return {Phase::Closed, r}; }

  bool is_closed() const { return phase == Phase::Closed; }
  std::string to_string() const;

  friend bool operator==(const LifecycleState& a, const LifecycleState& b) {
    return a.phase == b.phase &&
           (a.phase != Phase::Closed || a.end_reason == b.end_reason);
  }
};

struct Transition {
  LifecycleState from;
  LifecycleState to;
  ProbeEventKind trigger = ProbeEventKind::ConnectAttempt;
  Timestamp at = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct FsmStep {
  LifecycleState next;
  std::optional<Transition> exported;
};

// True when (from, to) is an edge of the lifecycle graph.
bool is_permitted_edge(const LifecycleState& from, const LifecycleState& to);

// Advance `state` by one probe event. The result carries a transition
// exactly when a performance profile must be cut. Throws IllegalTransition
// when the event cannot happen in `state`.
FsmStep apply_event(const LifecycleState& state, const ProbeEvent& event);

}  // namespace kpiflow
