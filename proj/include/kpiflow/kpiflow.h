/* SPDX-License-Identifier: Apache-2.0 */
/*
 * kpiflow C API: trace replay through the profile pipeline, IPFIX export,
 * collection and store queries.
 *
 * Every function returning kf_status leaves a description of the last
 * failure in kf_last_error() (per thread). Strings handed out through
 * char** parameters are released with kf_string_free.
 */
#ifndef KPIFLOW_KPIFLOW_H
#define KPIFLOW_KPIFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KF_API __declspec(dllexport)
#else
#define KF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kf_status {
  KF_OK = 0,
  KF_ERR_INVALID_ARGUMENT = 1,
  KF_ERR_SCRIPT = 2,     /* trace does not parse */
  KF_ERR_SIMULATION = 3, /* trace is illegal for the connection state */
  KF_ERR_IO = 4,
  KF_ERR_SOCKET = 5,
  KF_ERR_QUERY = 6,
  KF_ERR_INTERNAL = 7
} kf_status;

KF_API const char* kf_last_error(void);
KF_API const char* kf_status_name(kf_status status);
KF_API const char* kf_version(void);
KF_API void kf_string_free(char* s);

/* Configuration. Defaults: mtu 1500, enterprise number 61440 (placeholder,
 * not assigned), observation domain 1, idle flush 5000 ms, templates every
 * 20 data messages, 3000 instrumented connections, channel of 4096 events,
 * wall-clock export time. */
typedef struct kf_config kf_config;

KF_API kf_config* kf_config_create(void);
KF_API void kf_config_destroy(kf_config* cfg);
KF_API kf_status kf_config_set_mtu(kf_config* cfg, uint32_t mtu); /* >= 576 */
KF_API kf_status kf_config_set_enterprise_number(kf_config* cfg, uint32_t pen);
KF_API kf_status kf_config_set_observation_domain(kf_config* cfg, uint32_t domain);
KF_API kf_status kf_config_set_idle_flush_ms(kf_config* cfg, uint64_t ms);
/* 0 announces templates only once, ahead of the first data message. */
KF_API kf_status kf_config_set_template_resend(kf_config* cfg, uint32_t messages);
KF_API kf_status kf_config_set_ancillary_capacity(kf_config* cfg, uint64_t connections);
KF_API kf_status kf_config_set_channel_capacity(kf_config* cfg, uint64_t events);
KF_API kf_status kf_config_set_export_time(kf_config* cfg, uint32_t unix_seconds);

/* Replay: simulator -> aggregator -> IPFIX messages, all in memory. */
typedef struct kf_replay kf_replay;

typedef struct kf_replay_summary {
  uint64_t connections;
  uint64_t events;
  uint64_t directives;
  uint64_t refused_registrations;
  uint64_t profiles;
  uint64_t orphan_events;
  uint64_t data_messages;
  uint64_t template_messages;
  uint64_t records;
} kf_replay_summary;

KF_API kf_status kf_replay_file(const kf_config* cfg, const char* path, kf_replay** out);
KF_API kf_status kf_replay_text(const kf_config* cfg, const char* text, kf_replay** out);
KF_API void kf_replay_destroy(kf_replay* r);
KF_API size_t kf_replay_profile_count(const kf_replay* r);
KF_API kf_status kf_replay_get_summary(const kf_replay* r, kf_replay_summary* out);
/* Profiles in store format. path "-" writes to stdout. */
KF_API kf_status kf_replay_write_store(const kf_replay* r, const char* path);
KF_API kf_status kf_replay_store_text(const kf_replay* r, char** out);
/* IPFIX messages in send order (templates included). */
KF_API size_t kf_replay_message_count(const kf_replay* r);
KF_API kf_status kf_replay_message(const kf_replay* r, size_t index, const uint8_t** data,
                                   size_t* len);
/* All messages back to back, as an IPFIX file. */
KF_API kf_status kf_replay_write_ipfix(const kf_replay* r, const char* path);
/* One datagram per message to "addr:port" or "[v6]:port". */
KF_API kf_status kf_replay_send_udp(const kf_replay* r, const char* endpoint, size_t* sent);

/* Collector. */
typedef struct kf_collector kf_collector;

typedef struct kf_collector_stats {
  uint64_t datagrams;
  uint64_t appended;
  uint64_t malformed;
  uint64_t unknown_template_sets;
  uint64_t undecodable_records;
  uint64_t foreign_records;
} kf_collector_stats;

/* store_path may be NULL; otherwise profiles are appended to it. */
KF_API kf_status kf_collector_create(const kf_config* cfg, const char* store_path,
                                     kf_collector** out);
KF_API void kf_collector_destroy(kf_collector* c);
/* Returns the number of profiles appended. Never fails on bad input. */
KF_API size_t kf_collector_ingest(kf_collector* c, const uint8_t* data, size_t len,
                                  const char* peer);
/* Binds the UDP socket; *bound (optional) receives the local endpoint. */
KF_API kf_status kf_collector_bind(kf_collector* c, const char* endpoint, char** bound);
/* Receives until max_datagrams (0: unlimited) or idle_timeout_ms of silence
 * (0: wait indefinitely). */
KF_API kf_status kf_collector_serve(kf_collector* c, uint64_t max_datagrams,
                                    uint32_t idle_timeout_ms, uint64_t* received);
KF_API kf_status kf_collector_get_stats(const kf_collector* c, kf_collector_stats* out);
KF_API size_t kf_collector_profile_count(const kf_collector* c);
KF_API kf_status kf_collector_store_text(const kf_collector* c, char** out);

/* Stores and queries. Meta-socket profiles never enter a query. */
typedef struct kf_store kf_store;

typedef enum kf_query {
  KF_QUERY_ESTABLISHMENT = 0, /* window length, nanoseconds */
  KF_QUERY_SYN_RETRANS = 1,
  KF_QUERY_JITTER = 2 /* RTT window variance, squared microseconds */
} kf_query;

typedef struct kf_filter {
  int ip_version;         /* 0 any, 4 or 6 */
  const char* dst_prefix; /* "a/len" or NULL */
  int has_t_end_min;
  uint64_t t_end_min;
  int has_t_end_max;
  uint64_t t_end_max;
} kf_filter;

typedef struct kf_summary {
  uint64_t count;
  double median; /* lower median */
  double mean;
  double variance; /* population */
  uint64_t matching; /* SYN_RETRANS: establishments with a stall */
  double ratio;      /* SYN_RETRANS */
} kf_summary;

typedef struct kf_report_options {
  const char* query;    /* "establishment", "syn-retrans" or "jitter" */
  const char* group_by; /* "none", "ip-version" or "prefix"; NULL = none */
  unsigned v4_prefix;   /* 0 = 24 */
  unsigned v6_prefix;   /* 0 = 48 */
  int csv;
} kf_report_options;

KF_API kf_status kf_store_open(const char* path, kf_store** out);
KF_API kf_status kf_store_parse(const char* text, kf_store** out);
KF_API void kf_store_destroy(kf_store* s);
KF_API size_t kf_store_size(const kf_store* s);
/* filter may be NULL. */
KF_API kf_status kf_store_query(const kf_store* s, kf_query query, const kf_filter* filter,
                                kf_summary* out);
KF_API kf_status kf_store_report(const kf_store* s, const kf_report_options* options,
                                 const kf_filter* filter, char** out);

/* Information element registry as CSV. */
KF_API kf_status kf_registry_csv(uint32_t pen, char** out);

#ifdef __cplusplus
}
#endif

#endif
