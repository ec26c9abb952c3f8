// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <kpiflow/kpiflow.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>

namespace {

std::string trace(const char* name) { return std::string(KPIFLOW_TRACE_DIR) + "/" + name; }

struct Config {
  kf_config* p = kf_config_create();
  Config() { kf_config_set_export_time(p, 1); }
  ~Config() { kf_config_destroy(p); }
};

struct Replay {
  kf_replay* p = nullptr;
  ~Replay() { kf_replay_destroy(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  kf_string_free(s);
  return out;
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(kf_version()) == "0.1.0");
  CHECK(std::string(kf_status_name(KF_OK)) == "ok");
  CHECK(std::string(kf_status_name(KF_ERR_SCRIPT)) == "script error");
}

TEST_CASE("configuration validation") {
  Config cfg;
  CHECK(kf_config_set_mtu(cfg.p, 575) == KF_ERR_INVALID_ARGUMENT);
  CHECK(std::string(kf_last_error()).find("576") != std::string::npos);
  CHECK(kf_config_set_mtu(cfg.p, 576) == KF_OK);
  CHECK(kf_config_set_mtu(nullptr, 1500) == KF_ERR_INVALID_ARGUMENT);
  CHECK(kf_config_set_template_resend(cfg.p, 0) == KF_OK);
  CHECK(kf_config_set_channel_capacity(cfg.p, 0) == KF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("replay a trace file") {
  Config cfg;
  Replay r;
  REQUIRE(kf_replay_file(cfg.p, trace("syn_loss.trace").c_str(), &r.p) == KF_OK);
  CHECK(kf_replay_profile_count(r.p) == 2);
  kf_replay_summary s{};
  REQUIRE(kf_replay_get_summary(r.p, &s) == KF_OK);
  CHECK(s.profiles == 2);
  CHECK(s.connections == 1);
  CHECK(s.events == 5);
  CHECK(s.template_messages == 1);
  CHECK(s.data_messages == 1);
  CHECK(s.records == 2);
  CHECK(kf_replay_message_count(r.p) == 2);

  const uint8_t* data = nullptr;
  size_t len = 0;
  REQUIRE(kf_replay_message(r.p, 1, &data, &len) == KF_OK);
  REQUIRE(len >= 16);
  CHECK(data[0] == 0);
  CHECK(data[1] == 10);
  CHECK(kf_replay_message(r.p, 2, &data, &len) == KF_ERR_INVALID_ARGUMENT);

  char* text = nullptr;
  REQUIRE(kf_replay_store_text(r.p, &text) == KF_OK);
  const auto store = take(text);
  CHECK(lines(store) == 2);
  CHECK(store.find("\"from\":\"connecting\",\"to\":\"established\"") != std::string::npos);
}

TEST_CASE("replay errors map to status codes") {
  Config cfg;
  Replay r;
  CHECK(kf_replay_text(cfg.p, "@0 conn 1 frobnicate\n", &r.p) == KF_ERR_SCRIPT);
  CHECK(std::string(kf_last_error()).find("line 1") != std::string::npos);
  CHECK(r.p == nullptr);
  CHECK(kf_replay_text(cfg.p, "@0 conn 1 send 5\n", &r.p) == KF_ERR_SIMULATION);
  CHECK(kf_replay_file(cfg.p, "/nonexistent.trace", &r.p) == KF_ERR_IO);
  CHECK(kf_replay_text(cfg.p, nullptr, &r.p) == KF_ERR_INVALID_ARGUMENT);
  CHECK(kf_replay_text(cfg.p, "", &r.p) == KF_OK);
  CHECK(kf_replay_profile_count(r.p) == 0);
  CHECK(kf_replay_message_count(r.p) == 0);
}

TEST_CASE("collector ingests replay output") {
  Config cfg;
  Replay r;
  REQUIRE(kf_replay_file(cfg.p, trace("mptcp_reinject.trace").c_str(), &r.p) == KF_OK);
  kf_collector* c = nullptr;
  REQUIRE(kf_collector_create(cfg.p, nullptr, &c) == KF_OK);
  size_t appended = 0;
  for (size_t i = 0; i < kf_replay_message_count(r.p); ++i) {
    const uint8_t* data = nullptr;
    size_t len = 0;
    kf_replay_message(r.p, i, &data, &len);
    appended += kf_collector_ingest(c, data, len, "127.0.0.1:1");
  }
  CHECK(appended == kf_replay_profile_count(r.p));
  const uint8_t junk[] = {0, 10, 0, 3};
  CHECK(kf_collector_ingest(c, junk, sizeof junk, "x") == 0);
  kf_collector_stats st{};
  kf_collector_get_stats(c, &st);
  CHECK(st.malformed == 1);
  CHECK(st.appended == appended);

  char* text = nullptr;
  REQUIRE(kf_collector_store_text(c, &text) == KF_OK);
  kf_store* s = nullptr;
  REQUIRE(kf_store_parse(text, &s) == KF_OK);
  kf_string_free(text);
  CHECK(kf_store_size(s) == appended);
  kf_store_destroy(s);
  kf_collector_destroy(c);
}

TEST_CASE("UDP round trip through the C API") {
  Config cfg;
  Replay r;
  REQUIRE(kf_replay_file(cfg.p, trace("multi.trace").c_str(), &r.p) == KF_OK);
  kf_collector* c = nullptr;
  REQUIRE(kf_collector_create(cfg.p, nullptr, &c) == KF_OK);
  char* bound = nullptr;
  REQUIRE(kf_collector_bind(c, "127.0.0.1:0", &bound) == KF_OK);
  const auto endpoint = take(bound);
  CHECK(endpoint.rfind("127.0.0.1:", 0) == 0);

  uint64_t received = 0;
  const auto expected = kf_replay_message_count(r.p);
  std::thread server([&] { kf_collector_serve(c, expected, 5000, &received); });
  size_t sent = 0;
  CHECK(kf_replay_send_udp(r.p, endpoint.c_str(), &sent) == KF_OK);
  server.join();
  CHECK(sent == expected);
  CHECK(received == expected);
  CHECK(kf_collector_profile_count(c) == kf_replay_profile_count(r.p));

  char* a = nullptr;
  char* b = nullptr;
  kf_replay_store_text(r.p, &a);
  kf_collector_store_text(c, &b);
  kf_store* sa = nullptr;
  kf_store* sb = nullptr;
  kf_store_parse(a, &sa);
  kf_store_parse(b, &sb);
  kf_summary qa{}, qb{};
  CHECK(kf_store_query(sa, KF_QUERY_ESTABLISHMENT, nullptr, &qa) == KF_OK);
  CHECK(kf_store_query(sb, KF_QUERY_ESTABLISHMENT, nullptr, &qb) == KF_OK);
  CHECK(qa.count == qb.count);
  CHECK(qa.mean == qb.mean);
  kf_store_destroy(sa);
  kf_store_destroy(sb);
  kf_string_free(a);
  kf_string_free(b);
  CHECK(kf_replay_send_udp(r.p, "not an endpoint", &sent) == KF_ERR_INVALID_ARGUMENT);
  kf_collector_destroy(c);
}

TEST_CASE("store files and queries") {
  Config cfg;
  Replay r;
  REQUIRE(kf_replay_file(cfg.p, trace("syn_loss.trace").c_str(), &r.p) == KF_OK);
  const auto path = (std::filesystem::temp_directory_path() / "kpiflow_capi.jsonl").string();
  REQUIRE(kf_replay_write_store(r.p, path.c_str()) == KF_OK);
  kf_store* s = nullptr;
  REQUIRE(kf_store_open(path.c_str(), &s) == KF_OK);
  CHECK(kf_store_size(s) == 2);

  kf_summary q{};
  REQUIRE(kf_store_query(s, KF_QUERY_SYN_RETRANS, nullptr, &q) == KF_OK);
  CHECK(q.count == 1);
  CHECK(q.matching == 1);
  CHECK(q.ratio == 1.0);
  REQUIRE(kf_store_query(s, KF_QUERY_ESTABLISHMENT, nullptr, &q) == KF_OK);
  CHECK(q.median == 1.03e9);

  kf_filter f{};
  f.ip_version = 6;
  REQUIRE(kf_store_query(s, KF_QUERY_ESTABLISHMENT, &f, &q) == KF_OK);
  CHECK(q.count == 0);
  f.ip_version = 5;
  CHECK(kf_store_query(s, KF_QUERY_ESTABLISHMENT, &f, &q) == KF_ERR_INVALID_ARGUMENT);
  f = {};
  f.dst_prefix = "garbage";
  CHECK(kf_store_query(s, KF_QUERY_ESTABLISHMENT, &f, &q) == KF_ERR_INVALID_ARGUMENT);

  kf_report_options opt{};
  opt.query = "establishment";
  opt.csv = 1;
  char* out = nullptr;
  REQUIRE(kf_store_report(s, &opt, nullptr, &out) == KF_OK);
  CHECK(take(out).find("1030.000000") != std::string::npos);
  opt.query = "bogus";
  CHECK(kf_store_report(s, &opt, nullptr, &out) == KF_ERR_QUERY);

  kf_store_destroy(s);
  std::remove(path.c_str());
  CHECK(kf_store_open("/nonexistent.jsonl", &s) == KF_ERR_IO);
}

TEST_CASE("registry") {
  char* csv = nullptr;
  REQUIRE(kf_registry_csv(61440, &csv) == KF_OK);
  const auto text = take(csv);
  CHECK(text.rfind("name,element_id,pen,length,description\n", 0) == 0);
  CHECK(lines(text) == 38);
}
