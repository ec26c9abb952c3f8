// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" KPIFLOW_CLI "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string trace(const char* name) {
  return std::string("'") + KPIFLOW_TRACE_DIR + "/" + name + "'";
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

std::string tmp(const char* name) {
  return (std::filesystem::temp_directory_path() /
          (std::string(name) + "." + std::to_string(getpid())))
      .string();
}

}  // namespace

TEST_CASE("replay prints one line per profile") {
  auto r = run("replay " + trace("syn_loss.trace"));
  CHECK(r.status == 0);
  const auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].find("\"stalls\":1") != std::string::npos);

  r = run("replay " + trace("empty.trace"));
  CHECK(r.status == 0);
  CHECK(r.out.empty());
}

TEST_CASE("exit codes") {
  const auto bad = tmp("kpiflow_bad.trace");
  std::ofstream(bad) << "@0 conn 1 send 10\n";
  CHECK(run("replay '" + bad + "'").status == 2);
  std::ofstream(bad) << "@x what\n";
  CHECK(run("replay '" + bad + "'").status == 2);
  std::filesystem::remove(bad);
  CHECK(run("replay").status == 1);
  CHECK(run("frobnicate").status == 1);
  CHECK(run("replay " + trace("syn_loss.trace") + " --mtu 100").status == 1);
}

TEST_CASE("report from a replayed store") {
  const auto store = tmp("kpiflow_cli.jsonl");
  REQUIRE(run("replay " + trace("syn_loss.trace") + " " + trace("multi.trace") + " -o '" + store +
              "'")
              .status == 0);
  auto r = run("report -s '" + store + "' -q syn-retrans");
  CHECK(r.status == 0);
  CHECK(r.out.find("all") != std::string::npos);

  r = run("report -s '" + store + "' -q unknown");
  CHECK(r.status == 1);

  r = run("report -s '" + store + "' -q establishment --by ip-version", "KPIFLOW_FORMAT=csv");
  CHECK(r.status == 0);
  const auto lines = split_lines(r.out);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0].rfind("group,count,", 0) == 0);
  CHECK(lines[1].rfind("v4,", 0) == 0);
  std::filesystem::remove(store);

  const auto only = tmp("kpiflow_syn_loss.jsonl");
  run("replay " + trace("syn_loss.trace") + " -o '" + only + "'");
  r = run("report -s '" + only + "' -q syn-retrans --format csv");
  CHECK(split_lines(r.out).back() == "all,1,1,1.000000");
  std::filesystem::remove(only);
}

TEST_CASE("registry") {
  auto r = run("registry");
  CHECK(r.status == 0);
  std::ifstream in(std::string(KPIFLOW_SHARE_DIR) + "/registry.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(r.out == ss.str());
}

TEST_CASE("export to collect over UDP matches local replay") {
  const auto store = tmp("kpiflow_collected.jsonl");
  std::filesystem::remove(store);
  const std::string port = std::to_string(40000 + getpid() % 20000);
  const std::string traces = trace("multi.trace") + " " + trace("ipv6.trace") + " " +
                             trace("mptcp_reinject.trace");
  Run collected;
  std::thread collector([&] {
    collected = run("collect -b 127.0.0.1:" + port + " -s '" + store + "' --timeout-ms 3000");
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  const auto sent = run("export " + traces, "KPIFLOW_COLLECTOR=127.0.0.1:" + port);
  collector.join();
  CHECK(sent.status == 0);
  CHECK(collected.status == 0);

  const auto local = split_lines(run("replay " + traces).out);
  std::ifstream in(store);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto remote = split_lines(ss.str());
  REQUIRE(remote.size() == local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    // Collected lines carry the receive info after the local fields.
    const auto prefix = local[i].substr(0, local[i].size() - 1) + ",\"rx\":";
    CHECK(remote[i].rfind(prefix, 0) == 0);
  }
  std::filesystem::remove(store);
}
