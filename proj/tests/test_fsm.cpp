// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <optional>
#include <tuple>

#include "error.hpp"
#include "fsm.hpp"

using namespace kpiflow;

namespace {

ProbeEvent ev(ProbeEventKind k, EventDetail d = {}) {
  ProbeEvent e;
  e.kind = k;
  e.detail = d;
  return e;
}

using K = ProbeEventKind;

struct Expect {
  Phase next;
  bool exported;
};

// Lifecycle table written out by hand. Anything absent is illegal.
std::optional<Expect> expected(Phase from, K kind, bool stalled) {
  switch (from) {
    case Phase::Init:
      if (kind == K::ConnectAttempt) return Expect{Phase::Connecting, false};
      if (kind == K::AcceptEstablished || kind == K::SubflowJoin)
        return Expect{Phase::Established, true};
      return std::nullopt;
    case Phase::Connecting:
      if (kind == K::RetransmitTimeout) return Expect{Phase::Connecting, false};
      if (kind == K::ConnectEstablished) return Expect{Phase::Established, true};
      if (kind == K::ConnectError || kind == K::StateClose) return Expect{Phase::Closed, true};
      return std::nullopt;
    case Phase::Established:
      if (kind == K::SegmentValidated || kind == K::SubflowReinject ||
          kind == K::RecoveryComplete)
        return Expect{Phase::Established, false};
      if (kind == K::RetransmitTimeout)
        return stalled ? Expect{Phase::Lossy, true} : Expect{Phase::Established, false};
      if (kind == K::MetaRetransmitTimeout) return Expect{Phase::Lossy, true};
      if (kind == K::StateClose) return Expect{Phase::Closed, true};
      return std::nullopt;
    case Phase::Lossy:
      if (kind == K::SegmentValidated || kind == K::SubflowReinject ||
          kind == K::RetransmitTimeout || kind == K::MetaRetransmitTimeout)
        return Expect{Phase::Lossy, false};
      if (kind == K::RecoveryComplete) return Expect{Phase::Established, true};
      if (kind == K::StateClose) return Expect{Phase::Closed, true};
      return std::nullopt;
    case Phase::Closed:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("every (state, event) pair follows the lifecycle table") {
  for (int p = 0; p <= static_cast<int>(Phase::Closed); ++p) {
    for (std::size_t k = 0; k < kProbeEventKindCount; ++k) {
      for (bool stalled : {false, true}) {
        const auto from = LifecycleState{static_cast<Phase>(p)};
        const auto kind = static_cast<K>(k);
        EventDetail detail;
        if (kind == K::RetransmitTimeout || kind == K::MetaRetransmitTimeout)
          detail = TimerDetail{stalled, 0};
        if (kind == K::StateClose) detail = CloseDetail{EndReason::Reset};
        const auto want = expected(from.phase, kind, stalled);
        CAPTURE(p);
        CAPTURE(k);
        CAPTURE(stalled);
        if (!want) {
          try {
            apply_event(from, ev(kind, detail));
            FAIL("expected IllegalTransition");
          } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IllegalTransition);
          }
          continue;
        }
        const auto step = apply_event(from, ev(kind, detail));
        CHECK(step.next.phase == want->next);
        CHECK(step.exported.has_value() == want->exported);
        if (step.exported) {
          CHECK(step.exported->from == from);
          CHECK(step.exported->to == step.next);
          CHECK(is_permitted_edge(from, step.next));
        }
      }
    }
  }
}

TEST_CASE("closing carries the end reason") {
  auto s = apply_event(LifecycleState::established(),
                       ev(K::StateClose, CloseDetail{EndReason::Finished}));
  CHECK(s.next == LifecycleState::closed(EndReason::Finished));
  CHECK(s.next != LifecycleState::closed(EndReason::Reset));
  CHECK(s.next.to_string() == "closed(finished)");

  auto e = apply_event(LifecycleState::connecting(), ev(K::ConnectError, ConnectErrorDetail{111}));
  CHECK(e.next == LifecycleState::closed(EndReason::ConnectError));
}

TEST_CASE("phase names round trip") {
  for (auto p : {Phase::Init, Phase::Connecting, Phase::Established, Phase::Lossy, Phase::Closed})
    CHECK(phase_from_string(to_string(p)) == p);
  CHECK_FALSE(phase_from_string("open").has_value());
}

TEST_CASE("permitted edges") {
  CHECK(is_permitted_edge(LifecycleState::init(), LifecycleState::connecting()));
  CHECK(is_permitted_edge(LifecycleState::lossy(), LifecycleState::established()));
  CHECK_FALSE(is_permitted_edge(LifecycleState::closed(EndReason::Other),
                                LifecycleState::established()));
  CHECK_FALSE(is_permitted_edge(LifecycleState::init(), LifecycleState::lossy()));
}
