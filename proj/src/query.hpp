// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "store.hpp"

namespace kpiflow {

struct QueryFilter {
  std::optional<int> ip_version;     // 4 or 6
  std::optional<Prefix> dst_prefix;
  std::optional<Timestamp> t_end_min;  // inclusive
  std::optional<Timestamp> t_end_max;  // inclusive

  bool matches(const PerformanceProfile& p) const;
};

// Lower median for even counts, population variance.
struct Summary {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

Summary summarize(std::vector<double> values);

struct Ratio {
  std::size_t total = 0;
  std::size_t matching = 0;
  double ratio = 0.0;
};

// Meta-socket profiles never contribute to any query.

// Connecting->Established window lengths, nanoseconds.
std::vector<double> establishment_times(const ProfileStore& store, const QueryFilter& f);
Summary query_establishment_time(const ProfileStore& store, const QueryFilter& f);

// Establishment profiles with at least one stall over all establishment
// profiles.
Ratio query_syn_retransmission_ratio(const ProfileStore& store, const QueryFilter& f);

// RTT window variance (squared microseconds) of profiles leaving the
// Established or Lossy state that carry at least one RTT sample.
std::vector<double> jitter_values(const ProfileStore& store, const QueryFilter& f);
Summary query_jitter(const ProfileStore& store, const QueryFilter& f);

enum class QueryKind { Establishment, SynRetrans, Jitter };
enum class GroupBy { None, IpVersion, Prefix };

std::optional<QueryKind> query_kind_from_string(std::string_view s);
std::optional<GroupBy> group_by_from_string(std::string_view s);

struct ReportOptions {
  QueryKind kind = QueryKind::Establishment;
  GroupBy group_by = GroupBy::None;
  unsigned v4_prefix = 24;
  unsigned v6_prefix = 48;
  bool csv = false;
};

struct ReportRow {
  std::string group;
  Summary summary;  // establishment in milliseconds, jitter in us^2
  Ratio ratio;      // syn-retrans only
};

std::vector<ReportRow> run_report(const ProfileStore& store, const ReportOptions& opt,
                                  const QueryFilter& f);
std::string format_report(const std::vector<ReportRow>& rows, const ReportOptions& opt);

// Fixed six-decimal rendering used by every report.
std::string fixed6(double v);

}  // namespace kpiflow
