// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <string>

#include "error.hpp"
#include "fixtures.hpp"
#include "trace.hpp"

using namespace kpiflow;

namespace {

std::string script_error(const std::string& text) {
  try {
    parse_trace(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScriptError);
    return e.what();
  }
  FAIL("expected a script error");
  return {};
}

}  // namespace

TEST_CASE("parses every directive") {
  const auto s = parse_trace(R"(
# comment line
@0 conn 1 open 10.0.0.1:1000 -> 10.0.0.2:80 via eth0 mptcp   # trailing comment
@1 conn 2 accepted
@2 conn 3 accepted [2001:db8::1]:443 -> [2001:db8::2]:5000 via wlan0
@3 conn 1 established rtt=100 meta=50
@4 conn 1 send 10
@5 conn 1 recv seq=7 len=10 dss=99
@6 conn 1 rtt_sample 120
@7 conn 1 rto
@8 conn 1 rto retrans=1448
@9 conn 1 recovered
@10 conn 1 corrupt 20
@11 conn 1 join subflow=4
@12 conn 1 join subflow=5 10.0.1.1:1001 -> 10.0.0.2:80 via wlan0
@13 conn 5 reinject 300 from=1
@14 conn 50 meta_rto
@15 conn 9 open 10.0.0.1:1 -> 10.0.0.2:2 via lo
@16 conn 9 connect_error 111
@17 conn 1 close fin
@17 conn 2 close rst
@18 conn 3 close drop
)");
  REQUIRE(s.directives.size() == 20);
  CHECK(s.max_uid() == 50);

  const auto& open = std::get<directive::Open>(s.directives[0].body);
  CHECK(open.mptcp);
  CHECK(open.path.src.to_string() == "10.0.0.1:1000");
  CHECK(open.path.iface == "eth0");
  CHECK(s.directives[0].line == 3);

  CHECK_FALSE(std::get<directive::Accepted>(s.directives[1].body).path.has_value());
  CHECK(std::get<directive::Accepted>(s.directives[2].body).path->src.addr.version() == 6);

  const auto& est = std::get<directive::Established>(s.directives[3].body);
  CHECK(est.rtt_us == 100);
  CHECK(est.meta_uid == 50);

  const auto& recv = std::get<directive::Recv>(s.directives[5].body);
  CHECK(recv.seq == 7);
  CHECK(recv.len == 10);
  CHECK(recv.dss == 99);

  CHECK(std::get<directive::Rto>(s.directives[7].body).retrans == 0);
  CHECK(std::get<directive::Rto>(s.directives[8].body).retrans == 1448);
  CHECK(std::get<directive::Join>(s.directives[11].body).subflow_uid == 4);
  CHECK(std::get<directive::Join>(s.directives[12].body).path->iface == "wlan0");
  CHECK(std::get<directive::Reinject>(s.directives[13].body).from_uid == 1);
  CHECK(std::get<directive::ConnectError>(s.directives[16].body).err == 111);
  CHECK(std::get<directive::Close>(s.directives[19].body).kind == directive::CloseKind::Drop);
}

TEST_CASE("errors name the offending line") {
  CHECK(script_error("@0 conn 1 open 10.0.0.1:1 -> 10.0.0.2:2 via eth0\n@5 conn 1 frobnicate\n")
            .find("line 2") != std::string::npos);
  CHECK(script_error("@10 conn 1 open 10.0.0.1:1 -> 10.0.0.2:2 via eth0\n@5 conn 1 close fin\n")
            .find("backwards") != std::string::npos);
  CHECK(script_error("@0 conn 1 open 10.0.0.1:1 -> [::1]:2 via eth0\n").find("mixed") !=
        std::string::npos);
  CHECK(script_error("@0 conn 1 open 10.0.0.1:1 -> 10.0.0.2:2 via sixteen-chars-xx\n")
            .find("15") != std::string::npos);
  script_error("@0 conn 1 send 0\n");
  script_error("@0 conn 1 recv seq=0 len=0\n");
  script_error("@0 conn 1 established rtt=0\n");
  script_error("@0 conn 1 close later\n");
  script_error("@0 conn 1 send 10 extra\n");
  script_error("0 conn 1 send 10\n");
  script_error("@0 conn x send 10\n");
  script_error("@0 conn 1 open 10.0.0.1 -> 10.0.0.2:2 via eth0\n");
}

TEST_CASE("empty and comment-only scripts") {
  CHECK(parse_trace("").directives.empty());
  CHECK(parse_trace("# nothing\n\n   \n").directives.empty());
  CHECK(load_trace(testing::trace_path("empty.trace")).directives.empty());
}

TEST_CASE("missing file is an I/O error") {
  try {
    load_trace("/nonexistent/none.trace");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("shipped traces parse") {
  for (const char* name : {"syn_loss.trace", "rto.trace", "accept.trace", "connect_error.trace",
                           "reorder.trace", "ipv6.trace", "mptcp_join.trace",
                           "mptcp_reinject.trace", "mptcp_meta_rto.trace", "lossy_close.trace",
                           "multi.trace", "many.trace"}) {
    CAPTURE(name);
    CHECK_FALSE(load_trace(testing::trace_path(name)).directives.empty());
  }
}
