// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "address.hpp"
#include "kpi.hpp"

namespace kpiflow {

// Line-oriented trace language, one directive per line:
//
//   @<ns> conn <uid> open <src>:<port> -> <dst>:<port> via <iface> [mptcp]
//   @<ns> conn <uid> accepted [<local>:<port> -> <remote>:<port> via <iface>]
//   @<ns> conn <uid> connect_error <errno>
//   @<ns> conn <uid> established rtt=<us> [meta=<uid>]
//   @<ns> conn <uid> send <len>
//   @<ns> conn <uid> recv seq=<n> len=<len> [dss=<n>]
//   @<ns> conn <uid> rtt_sample <us>
//   @<ns> conn <uid> rto [retrans=<bytes>]
//   @<ns> conn <uid> recovered
//   @<ns> conn <uid> corrupt <len>
//   @<ns> conn <uid> close fin|rst|drop
//   @<ns> conn <uid> join subflow=<uid> [<src>:<port> -> <dst>:<port> via <iface>]
//   @<ns> conn <uid> reinject <bytes> from=<uid>
//   @<ns> conn <uid> meta_rto
//
// '#' starts a comment. Timestamps must not decrease.

struct PathSpec {
  Endpoint src;
  Endpoint dst;
  std::string iface;
};

namespace directive {
struct Open {
  PathSpec path;
  bool mptcp = false;
};
struct Accepted {
  std::optional<PathSpec> path;
};
struct ConnectError {
  int err = 0;
};
struct Established {
  std::uint64_t rtt_us = 0;
  std::optional<std::uint64_t> meta_uid;
};
struct Send {
  std::uint64_t len = 0;
};
struct Recv {
  std::uint32_t seq = 0;
  std::uint64_t len = 0;
  std::optional<std::uint64_t> dss;
};
struct RttSample {
  std::uint64_t us = 0;
};
struct Rto {
  std::uint64_t retrans = 0;
};
struct Recovered {};
struct Corrupt {
  std::uint64_t len = 0;
};
enum class CloseKind { Fin, Rst, Drop };
struct Close {
  CloseKind kind = CloseKind::Fin;
};
struct Join {
  std::uint64_t subflow_uid = 0;
  std::optional<PathSpec> path;
};
struct Reinject {
  std::uint64_t bytes = 0;
  std::uint64_t from_uid = 0;
};
struct MetaRto {};
}  // namespace directive

using DirectiveBody =
    std::variant<directive::Open, directive::Accepted, directive::ConnectError,
                 directive::Established, directive::Send, directive::Recv,
                 directive::RttSample, directive::Rto, directive::Recovered,
                 directive::Corrupt, directive::Close, directive::Join,
                 directive::Reinject, directive::MetaRto>;

struct Directive {
  Timestamp at = 0;
  std::uint64_t uid = 0;
  std::size_t line = 0;
  DirectiveBody body;
};

struct TraceScript {
  std::vector<Directive> directives;

  // Largest connection uid named anywhere in the script (0 when empty).
  std::uint64_t max_uid() const;
};

// Throws ScriptError with the offending line number.
TraceScript parse_trace(std::string_view text);
TraceScript load_trace(const std::filesystem::path& path);

}  // namespace kpiflow
