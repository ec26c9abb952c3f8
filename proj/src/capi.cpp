// SPDX-License-Identifier: Apache-2.0
#include "kpiflow/kpiflow.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "collector.hpp"
#include "error.hpp"
#include "pipeline.hpp"
#include "profile_codec.hpp"
#include "query.hpp"
#include "trace.hpp"

using namespace kpiflow;

struct kf_config {
  PipelineConfig pipeline;
};

struct kf_replay {
  PipelineResult result;
};

struct kf_collector {
  Collector collector;
  std::optional<UdpSocket> socket;
};

struct kf_store {
  ProfileStore store;
};

namespace {

thread_local std::string g_last_error;

kf_status fail(kf_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

kf_status status_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::ScriptError: return KF_ERR_SCRIPT;
    case ErrorCode::SimViolation:
    case ErrorCode::UnknownSubflow:
    case ErrorCode::IllegalTransition: return KF_ERR_SIMULATION;
    case ErrorCode::Io: return KF_ERR_IO;
    case ErrorCode::Socket: return KF_ERR_SOCKET;
    case ErrorCode::InvalidArgument:
    case ErrorCode::RecordTooLarge: return KF_ERR_INVALID_ARGUMENT;
    default: return KF_ERR_INTERNAL;
  }
}

template <class Fn>
kf_status guard(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(KF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KF_ERR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define KF_REQUIRE(cond, what) \
  if (!(cond)) return fail(KF_ERR_INVALID_ARGUMENT, what)

Endpoint parse_endpoint(const char* text) {
  auto ep = text ? Endpoint::parse(text) : std::nullopt;
  if (!ep) throw Error(ErrorCode::InvalidArgument, std::string("bad endpoint '") + (text ? text : "") + "'");
  return *ep;
}

kf_status run_replay(const kf_config* cfg, const TraceScript& script, kf_replay** out) {
  static const kf_config defaults{};
  auto r = std::make_unique<kf_replay>();
  r->result = run_pipeline(script, (cfg ? *cfg : defaults).pipeline);
  *out = r.release();
  return KF_OK;
}

std::string store_text(const std::vector<PerformanceProfile>& profiles) {
  std::string s;
  for (const auto& p : profiles) s += to_store_line(StoredProfile{p, std::nullopt}) + "\n";
  return s;
}

QueryFilter to_filter(const kf_filter* f) {
  QueryFilter q;
  if (!f) return q;
  if (f->ip_version == 4 || f->ip_version == 6) {
    q.ip_version = f->ip_version;
  } else if (f->ip_version != 0) {
    throw Error(ErrorCode::InvalidArgument, "ip_version must be 0, 4 or 6");
  }
  if (f->dst_prefix) {
    q.dst_prefix = Prefix::parse(f->dst_prefix);
    if (!q.dst_prefix)
      throw Error(ErrorCode::InvalidArgument, std::string("bad prefix '") + f->dst_prefix + "'");
  }
  if (f->has_t_end_min) q.t_end_min = f->t_end_min;
  if (f->has_t_end_max) q.t_end_max = f->t_end_max;
  return q;
}

}  // namespace

extern "C" {

const char* kf_last_error(void) { return g_last_error.c_str(); }

const char* kf_status_name(kf_status status) {
  switch (status) {
    case KF_OK: return "ok";
    case KF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KF_ERR_SCRIPT: return "script error";
    case KF_ERR_SIMULATION: return "simulation violation";
    case KF_ERR_IO: return "i/o error";
    case KF_ERR_SOCKET: return "socket error";
    case KF_ERR_QUERY: return "query error";
    case KF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kf_version(void) { return "0.1.0"; }

void kf_string_free(char* s) { std::free(s); }

kf_config* kf_config_create(void) { return new (std::nothrow) kf_config{}; }
void kf_config_destroy(kf_config* cfg) { delete cfg; }

kf_status kf_config_set_mtu(kf_config* cfg, uint32_t mtu) {
  KF_REQUIRE(cfg, "null config");
  KF_REQUIRE(mtu >= kMinMtu && mtu <= 0xFFFF, "mtu must be between 576 and 65535");
  cfg->pipeline.exporter.mtu = mtu;
  return KF_OK;
}

kf_status kf_config_set_enterprise_number(kf_config* cfg, uint32_t pen) {
  KF_REQUIRE(cfg, "null config");
  cfg->pipeline.exporter.enterprise_number = pen;
  return KF_OK;
}

kf_status kf_config_set_observation_domain(kf_config* cfg, uint32_t domain) {
  KF_REQUIRE(cfg, "null config");
  cfg->pipeline.exporter.observation_domain = domain;
  return KF_OK;
}

kf_status kf_config_set_idle_flush_ms(kf_config* cfg, uint64_t ms) {
  KF_REQUIRE(cfg, "null config");
  KF_REQUIRE(ms <= UINT64_MAX / 1'000'000, "idle flush out of range");
  cfg->pipeline.exporter.idle_flush_ns = ms * 1'000'000;
  return KF_OK;
}

kf_status kf_config_set_template_resend(kf_config* cfg, uint32_t messages) {
  KF_REQUIRE(cfg, "null config");
  cfg->pipeline.exporter.template_resend = messages;
  return KF_OK;
}

kf_status kf_config_set_ancillary_capacity(kf_config* cfg, uint64_t connections) {
  KF_REQUIRE(cfg, "null config");
  cfg->pipeline.sim.ancillary_capacity = connections;
  return KF_OK;
}

kf_status kf_config_set_channel_capacity(kf_config* cfg, uint64_t events) {
  KF_REQUIRE(cfg, "null config");
  KF_REQUIRE(events > 0, "channel capacity must be positive");
  cfg->pipeline.channel_capacity = events;
  return KF_OK;
}

kf_status kf_config_set_export_time(kf_config* cfg, uint32_t unix_seconds) {
  KF_REQUIRE(cfg, "null config");
  cfg->pipeline.exporter.export_time = unix_seconds;
  return KF_OK;
}

kf_status kf_replay_file(const kf_config* cfg, const char* path, kf_replay** out) {
  KF_REQUIRE(path && out, "null argument");
  return guard([&] { return run_replay(cfg, load_trace(path), out); });
}

kf_status kf_replay_text(const kf_config* cfg, const char* text, kf_replay** out) {
  KF_REQUIRE(text && out, "null argument");
  return guard([&] { return run_replay(cfg, parse_trace(text), out); });
}

void kf_replay_destroy(kf_replay* r) { delete r; }

size_t kf_replay_profile_count(const kf_replay* r) { return r ? r->result.profiles.size() : 0; }

kf_status kf_replay_get_summary(const kf_replay* r, kf_replay_summary* out) {
  KF_REQUIRE(r && out, "null argument");
  const auto& res = r->result;
  out->connections = res.sim.connections_seen;
  out->events = res.sim.events_emitted;
  out->directives = res.sim.directives_applied;
  out->refused_registrations = res.sim.refused_registrations;
  out->profiles = res.profiles.size();
  out->orphan_events = res.aggregator.orphans;
  out->data_messages = res.exporter.data_messages;
  out->template_messages = res.exporter.template_messages;
  out->records = res.exporter.records;
  return KF_OK;
}

kf_status kf_replay_write_store(const kf_replay* r, const char* path) {
  KF_REQUIRE(r && path, "null argument");
  return guard([&] {
    const auto text = store_text(r->result.profiles);
    if (std::strcmp(path, "-") == 0) {
      std::cout << text << std::flush;
      return KF_OK;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) return fail(KF_ERR_IO, std::string("cannot write ") + path);
    return KF_OK;
  });
}

kf_status kf_replay_store_text(const kf_replay* r, char** out) {
  KF_REQUIRE(r && out, "null argument");
  return guard([&] {
    *out = dup_string(store_text(r->result.profiles));
    return KF_OK;
  });
}

size_t kf_replay_message_count(const kf_replay* r) { return r ? r->result.messages.size() : 0; }

kf_status kf_replay_message(const kf_replay* r, size_t index, const uint8_t** data, size_t* len) {
  KF_REQUIRE(r && data && len, "null argument");
  KF_REQUIRE(index < r->result.messages.size(), "message index out of range");
  *data = r->result.messages[index].data();
  *len = r->result.messages[index].size();
  return KF_OK;
}

kf_status kf_replay_write_ipfix(const kf_replay* r, const char* path) {
  KF_REQUIRE(r && path, "null argument");
  return guard([&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& m : r->result.messages)
      out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size()));
    if (!out) return fail(KF_ERR_IO, std::string("cannot write ") + path);
    return KF_OK;
  });
}

kf_status kf_replay_send_udp(const kf_replay* r, const char* endpoint, size_t* sent) {
  KF_REQUIRE(r, "null replay");
  return guard([&] {
    const auto to = parse_endpoint(endpoint);
    auto sock = UdpSocket::open(to.addr.family());
    size_t n = 0;
    for (const auto& m : r->result.messages) {
      sock.send_to(m, to);
      ++n;
      if (sent) *sent = n;
    }
    if (sent) *sent = n;
    return KF_OK;
  });
}

kf_status kf_collector_create(const kf_config* cfg, const char* store_path, kf_collector** out) {
  KF_REQUIRE(out, "null argument");
  return guard([&] {
    const std::uint32_t pen =
        cfg ? cfg->pipeline.exporter.enterprise_number : kDefaultEnterpriseNumber;
    std::optional<std::filesystem::path> path;
    if (store_path) path = store_path;
    *out = new kf_collector{Collector(pen, path), std::nullopt};
    return KF_OK;
  });
}

void kf_collector_destroy(kf_collector* c) { delete c; }

size_t kf_collector_ingest(kf_collector* c, const uint8_t* data, size_t len, const char* peer) {
  if (!c || (!data && len > 0)) return 0;
  try {
    return c->collector.ingest({data, len}, peer ? peer : "", wall_clock_ns());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 0;
  }
}

kf_status kf_collector_bind(kf_collector* c, const char* endpoint, char** bound) {
  KF_REQUIRE(c, "null collector");
  return guard([&] {
    c->socket = UdpSocket::bind(parse_endpoint(endpoint));
    if (bound) *bound = dup_string(c->socket->local_endpoint().to_string());
    return KF_OK;
  });
}

kf_status kf_collector_serve(kf_collector* c, uint64_t max_datagrams, uint32_t idle_timeout_ms,
                             uint64_t* received) {
  KF_REQUIRE(c, "null collector");
  KF_REQUIRE(c->socket, "collector is not bound");
  return guard([&] {
    // poll() waits indefinitely on a negative timeout.
    const auto timeout = idle_timeout_ms == 0 ? std::chrono::milliseconds(-1)
                                              : std::chrono::milliseconds(idle_timeout_ms);
    const auto n = c->collector.serve(*c->socket, max_datagrams, timeout);
    if (received) *received = n;
    return KF_OK;
  });
}

kf_status kf_collector_get_stats(const kf_collector* c, kf_collector_stats* out) {
  KF_REQUIRE(c && out, "null argument");
  const auto s = c->collector.stats();
  out->datagrams = s.datagrams;
  out->appended = s.appended;
  out->malformed = s.malformed;
  out->unknown_template_sets = s.unknown_template_sets;
  out->undecodable_records = s.undecodable_records;
  out->foreign_records = s.foreign_records;
  return KF_OK;
}

size_t kf_collector_profile_count(const kf_collector* c) {
  return c ? c->collector.store().size() : 0;
}

kf_status kf_collector_store_text(const kf_collector* c, char** out) {
  KF_REQUIRE(c && out, "null argument");
  return guard([&] {
    std::ostringstream s;
    c->collector.store().write(s);
    *out = dup_string(s.str());
    return KF_OK;
  });
}

kf_status kf_store_open(const char* path, kf_store** out) {
  KF_REQUIRE(path && out, "null argument");
  return guard([&] {
    *out = new kf_store{ProfileStore::load(path)};
    return KF_OK;
  });
}

kf_status kf_store_parse(const char* text, kf_store** out) {
  KF_REQUIRE(text && out, "null argument");
  return guard([&] {
    std::istringstream in(text);
    *out = new kf_store{ProfileStore::parse(in)};
    return KF_OK;
  });
}

void kf_store_destroy(kf_store* s) { delete s; }

size_t kf_store_size(const kf_store* s) { return s ? s->store.size() : 0; }

kf_status kf_store_query(const kf_store* s, kf_query query, const kf_filter* filter,
                         kf_summary* out) {
  KF_REQUIRE(s && out, "null argument");
  return guard([&] {
    const auto f = to_filter(filter);
    *out = kf_summary{};
    switch (query) {
      case KF_QUERY_ESTABLISHMENT:
      case KF_QUERY_JITTER: {
        const auto sum = query == KF_QUERY_JITTER ? query_jitter(s->store, f)
                                                  : query_establishment_time(s->store, f);
        out->count = sum.count;
        out->median = sum.median;
        out->mean = sum.mean;
        out->variance = sum.variance;
        return KF_OK;
      }
      case KF_QUERY_SYN_RETRANS: {
        const auto r = query_syn_retransmission_ratio(s->store, f);
        out->count = r.total;
        out->matching = r.matching;
        out->ratio = r.ratio;
        return KF_OK;
      }
    }
    return fail(KF_ERR_QUERY, "unknown query");
  });
}

kf_status kf_store_report(const kf_store* s, const kf_report_options* options,
                          const kf_filter* filter, char** out) {
  KF_REQUIRE(s && options && out, "null argument");
  return guard([&] {
    ReportOptions opt;
    auto kind = options->query ? query_kind_from_string(options->query) : std::nullopt;
    if (!kind)
      return fail(KF_ERR_QUERY, std::string("unknown query '") +
                                    (options->query ? options->query : "") + "'");
    opt.kind = *kind;
    if (options->group_by) {
      auto g = group_by_from_string(options->group_by);
      if (!g) return fail(KF_ERR_QUERY, std::string("unknown grouping '") + options->group_by + "'");
      opt.group_by = *g;
    }
    if (options->v4_prefix) opt.v4_prefix = options->v4_prefix;
    if (options->v6_prefix) opt.v6_prefix = options->v6_prefix;
    KF_REQUIRE(opt.v4_prefix <= 32 && opt.v6_prefix <= 128, "prefix length out of range");
    opt.csv = options->csv != 0;
    *out = dup_string(format_report(run_report(s->store, opt, to_filter(filter)), opt));
    return KF_OK;
  });
}

kf_status kf_registry_csv(uint32_t pen, char** out) {
  KF_REQUIRE(out, "null argument");
  return guard([&] {
    *out = dup_string(registry_csv(pen));
    return KF_OK;
  });
}

}  // extern "C"
