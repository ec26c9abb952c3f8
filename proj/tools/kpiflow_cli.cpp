// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "kpiflow/kpiflow.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kScript = 2, kInternal = 3 };

int exit_for(kf_status s) {
  switch (s) {
    case KF_OK: return kOk;
    case KF_ERR_INVALID_ARGUMENT:
    case KF_ERR_QUERY: return kUsage;
    case KF_ERR_SCRIPT:
    case KF_ERR_SIMULATION: return kScript;
    default: return kInternal;
  }
}

int report_failure(kf_status s, const std::string& context) {
  std::cerr << "kpiflow: " << context << ": " << kf_status_name(s) << ": " << kf_last_error()
            << "\n";
  return exit_for(s);
}

struct ConfigDeleter {
  void operator()(kf_config* c) const { kf_config_destroy(c); }
};
struct ReplayDeleter {
  void operator()(kf_replay* r) const { kf_replay_destroy(r); }
};
struct CollectorDeleter {
  void operator()(kf_collector* c) const { kf_collector_destroy(c); }
};
struct StoreDeleter {
  void operator()(kf_store* s) const { kf_store_destroy(s); }
};
using ConfigPtr = std::unique_ptr<kf_config, ConfigDeleter>;
using ReplayPtr = std::unique_ptr<kf_replay, ReplayDeleter>;

struct ExportOptions {
  std::uint32_t mtu = 1500;
  std::uint32_t pen = 61440;
  std::uint32_t domain = 1;
  std::uint32_t template_resend = 20;
  std::uint64_t idle_flush_ms = 5000;
};

void add_export_flags(CLI::App* cmd, ExportOptions& o) {
  cmd->add_option("--mtu", o.mtu, "IPFIX message size limit in bytes")
      ->envname("KPIFLOW_MTU")
      ->check(CLI::Range(576, 65535))
      ->capture_default_str();
  cmd->add_option("--pen", o.pen, "Private enterprise number of the profile elements")
      ->envname("KPIFLOW_PEN")
      ->capture_default_str();
  cmd->add_option("--domain", o.domain, "Observation domain id")->capture_default_str();
  cmd->add_option("--template-resend", o.template_resend,
                  "Re-announce templates every N data messages (0: only once)")
      ->capture_default_str();
  cmd->add_option("--idle-flush-ms", o.idle_flush_ms,
                  "Flush a partial message once its oldest record is this old (trace time)")
      ->capture_default_str();
}

kf_status make_config(const ExportOptions& o, ConfigPtr& out) {
  out.reset(kf_config_create());
  if (!out) return KF_ERR_INTERNAL;
  kf_status s = kf_config_set_mtu(out.get(), o.mtu);
  if (s == KF_OK) s = kf_config_set_enterprise_number(out.get(), o.pen);
  if (s == KF_OK) s = kf_config_set_observation_domain(out.get(), o.domain);
  if (s == KF_OK) s = kf_config_set_template_resend(out.get(), o.template_resend);
  if (s == KF_OK) s = kf_config_set_idle_flush_ms(out.get(), o.idle_flush_ms);
  return s;
}

int cmd_replay(const std::vector<std::string>& traces, const std::string& out_path,
               const std::string& ipfix_path, const ExportOptions& o) {
  ConfigPtr cfg;
  if (auto s = make_config(o, cfg); s != KF_OK) return report_failure(s, "configuration");
  std::string text;
  std::vector<ReplayPtr> replays;
  for (const auto& t : traces) {
    kf_replay* r = nullptr;
    if (auto s = kf_replay_file(cfg.get(), t.c_str(), &r); s != KF_OK) return report_failure(s, t);
    replays.emplace_back(r);
    char* store = nullptr;
    if (auto s = kf_replay_store_text(r, &store); s != KF_OK) return report_failure(s, t);
    text += store;
    kf_string_free(store);
  }
  if (out_path == "-") {
    std::cout << text << std::flush;
  } else {
    std::FILE* f = std::fopen(out_path.c_str(), "wb");
    if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
      if (f) std::fclose(f);
      std::cerr << "kpiflow: cannot write " << out_path << "\n";
      return kInternal;
    }
    std::fclose(f);
  }
  if (!ipfix_path.empty()) {
    if (replays.size() != 1) {
      std::cerr << "kpiflow: --ipfix takes exactly one trace\n";
      return kUsage;
    }
    if (auto s = kf_replay_write_ipfix(replays[0].get(), ipfix_path.c_str()); s != KF_OK)
      return report_failure(s, ipfix_path);
  }
  return kOk;
}

int cmd_export(const std::vector<std::string>& traces, const std::string& collector,
               const ExportOptions& o) {
  ConfigPtr cfg;
  if (auto s = make_config(o, cfg); s != KF_OK) return report_failure(s, "configuration");
  for (const auto& t : traces) {
    kf_replay* raw = nullptr;
    if (auto s = kf_replay_file(cfg.get(), t.c_str(), &raw); s != KF_OK)
      return report_failure(s, t);
    ReplayPtr r(raw);
    size_t sent = 0;
    if (auto s = kf_replay_send_udp(r.get(), collector.c_str(), &sent); s != KF_OK)
      return report_failure(s, collector);
    kf_replay_summary sum{};
    kf_replay_get_summary(r.get(), &sum);
    std::cout << t << ": messages " << sent << " (templates " << sum.template_messages
              << ", data " << sum.data_messages << ") records " << sum.records << "\n";
  }
  return kOk;
}

int cmd_collect(const std::string& bind, const std::string& store_path, std::uint32_t pen,
                std::uint64_t max_datagrams, std::uint32_t timeout_ms) {
  ConfigPtr cfg(kf_config_create());
  if (!cfg) return kInternal;
  kf_config_set_enterprise_number(cfg.get(), pen);
  kf_collector* raw = nullptr;
  if (auto s = kf_collector_create(cfg.get(), store_path.c_str(), &raw); s != KF_OK)
    return report_failure(s, store_path);
  std::unique_ptr<kf_collector, CollectorDeleter> c(raw);
  char* bound = nullptr;
  if (auto s = kf_collector_bind(c.get(), bind.c_str(), &bound); s != KF_OK)
    return report_failure(s, bind);
  std::cerr << "listening on " << bound << "\n";
  kf_string_free(bound);
  std::uint64_t received = 0;
  if (auto s = kf_collector_serve(c.get(), max_datagrams, timeout_ms, &received); s != KF_OK)
    return report_failure(s, "receive");
  kf_collector_stats st{};
  kf_collector_get_stats(c.get(), &st);
  std::cout << "datagrams " << st.datagrams << " profiles " << st.appended << " malformed "
            << st.malformed << " undecodable " << st.undecodable_records << "\n";
  return kOk;
}

struct ReportArgs {
  std::string store;
  std::string query;
  std::string by = "none";
  std::string filter;
  std::string prefix;
  unsigned v4_len = 24;
  unsigned v6_len = 48;
  std::string format = "table";
};

int cmd_report(const ReportArgs& a) {
  kf_store* raw = nullptr;
  if (auto s = kf_store_open(a.store.c_str(), &raw); s != KF_OK) return report_failure(s, a.store);
  std::unique_ptr<kf_store, StoreDeleter> store(raw);
  kf_filter f{};
  if (a.filter == "v4") f.ip_version = 4;
  if (a.filter == "v6") f.ip_version = 6;
  if (!a.prefix.empty()) f.dst_prefix = a.prefix.c_str();
  kf_report_options opt{a.query.c_str(), a.by.c_str(), a.v4_len, a.v6_len, a.format == "csv"};
  char* out = nullptr;
  if (auto s = kf_store_report(store.get(), &opt, &f, &out); s != KF_OK)
    return report_failure(s, "report");
  std::cout << out;
  kf_string_free(out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport performance profiles: replay, IPFIX export, collection, reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kf_version());

  std::vector<std::string> traces;
  std::string out_path = "-";
  std::string ipfix_path;
  ExportOptions replay_opts;
  auto* replay = app.add_subcommand("replay", "Replay traces and print the emitted profiles");
  replay->add_option("traces", traces, "Trace files")->required()->check(CLI::ExistingFile);
  replay->add_option("-o,--out", out_path, "Store-format output ('-' for stdout)")
      ->capture_default_str();
  replay->add_option("--ipfix", ipfix_path, "Also write the IPFIX messages to this file");
  add_export_flags(replay, replay_opts);

  std::string collector = "127.0.0.1:4739";
  ExportOptions export_opts;
  auto* exp = app.add_subcommand("export", "Replay traces and send the IPFIX messages over UDP");
  exp->add_option("traces", traces, "Trace files")->required()->check(CLI::ExistingFile);
  exp->add_option("-c,--collector", collector, "Collector endpoint")
      ->envname("KPIFLOW_COLLECTOR")
      ->capture_default_str();
  add_export_flags(exp, export_opts);

  std::string bind = "0.0.0.0:4739";
  std::string store_path;
  std::uint32_t collect_pen = 61440;
  std::uint64_t max_datagrams = 0;
  std::uint32_t timeout_ms = 0;
  auto* collect = app.add_subcommand("collect", "Receive IPFIX profiles into a store");
  collect->add_option("-b,--bind", bind, "Listen endpoint")
      ->envname("KPIFLOW_BIND")
      ->capture_default_str();
  collect->add_option("-s,--store", store_path, "Store file (appended)")->required();
  collect->add_option("--pen", collect_pen, "Private enterprise number of the profile elements")
      ->envname("KPIFLOW_PEN")
      ->capture_default_str();
  collect->add_option("--max-datagrams", max_datagrams, "Stop after this many datagrams (0: no limit)")
      ->capture_default_str();
  collect->add_option("--timeout-ms", timeout_ms, "Stop after this much silence (0: never)")
      ->capture_default_str();

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Summarize a store");
  report->add_option("-s,--store", ra.store, "Store file")->required()->check(CLI::ExistingFile);
  report->add_option("-q,--query", ra.query, "Query")
      ->required()
      ->check(CLI::IsMember({"establishment", "syn-retrans", "jitter"}));
  report->add_option("--by", ra.by, "Grouping")
      ->check(CLI::IsMember({"none", "ip-version", "prefix"}))
      ->capture_default_str();
  report->add_option("--filter", ra.filter, "Address family")->check(CLI::IsMember({"v4", "v6"}));
  report->add_option("--prefix", ra.prefix, "Destination prefix filter, a/len");
  report->add_option("--v4-prefix-len", ra.v4_len, "Grouping prefix length for IPv4")
      ->check(CLI::Range(0, 32))
      ->capture_default_str();
  report->add_option("--v6-prefix-len", ra.v6_len, "Grouping prefix length for IPv6")
      ->check(CLI::Range(0, 128))
      ->capture_default_str();
  report->add_option("--format", ra.format, "Output format")
      ->envname("KPIFLOW_FORMAT")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();

  std::uint32_t registry_pen = 61440;
  auto* registry = app.add_subcommand("registry", "Print the information element registry (CSV)");
  registry->add_option("--pen", registry_pen, "Private enterprise number")
      ->envname("KPIFLOW_PEN")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (*replay) return cmd_replay(traces, out_path, ipfix_path, replay_opts);
  if (*exp) return cmd_export(traces, collector, export_opts);
  if (*collect) return cmd_collect(bind, store_path, collect_pen, max_datagrams, timeout_ms);
  if (*report) return cmd_report(ra);
  if (*registry) {
    char* csv = nullptr;
    if (auto s = kf_registry_csv(registry_pen, &csv); s != KF_OK) return report_failure(s, "registry");
    std::cout << csv;
    kf_string_free(csv);
    return kOk;
  }
  return kUsage;
}
