// SPDX-License-Identifier: Apache-2.0
#include "query.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace kpiflow {

namespace {

bool counts(const PerformanceProfile& p, const QueryFilter& f) {
  return p.key.transport != Transport::MptcpMeta && f.matches(p);
}

template <class Fn>
void for_each_transition(const ProfileStore& store, Phase from, Phase to, const QueryFilter& f,
                         Fn&& fn) {
  for (auto i : store.select(from, to, f.ip_version)) {
    const auto& p = store.entries()[i].profile;
    if (counts(p, f)) fn(p);
  }
}

constexpr Phase kAllPhases[] = {Phase::Init, Phase::Connecting, Phase::Established, Phase::Lossy,
                                Phase::Closed};

struct GroupKey {
  int version = 0;
  IpAddress network;
  std::string label;

  friend bool operator<(const GroupKey& a, const GroupKey& b) {
    return std::tie(a.version, a.network) < std::tie(b.version, b.network);
  }
};

GroupKey group_of(const PerformanceProfile& p, const ReportOptions& opt) {
  const auto& dst = p.key.dst.addr;
  switch (opt.group_by) {
    case GroupBy::None: return {0, {}, "all"};
    case GroupBy::IpVersion: return {dst.version(), {}, "v" + std::to_string(dst.version())};
    case GroupBy::Prefix: {
      const unsigned len = dst.version() == 4 ? opt.v4_prefix : opt.v6_prefix;
      Prefix pfx{dst.masked(len), len};
      return {dst.version(), pfx.network, pfx.to_string()};
    }
  }
  return {};
}

}  // namespace

bool QueryFilter::matches(const PerformanceProfile& p) const {
  if (ip_version && p.ip_version() != *ip_version) return false;
  if (dst_prefix && !dst_prefix->contains(p.key.dst.addr)) return false;
  if (t_end_min && p.t_end < *t_end_min) return false;
  if (t_end_max && p.t_end > *t_end_max) return false;
  return true;
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.median = values[(values.size() - 1) / 2];
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.variance = sq / static_cast<double>(values.size());
  return s;
}

std::vector<double> establishment_times(const ProfileStore& store, const QueryFilter& f) {
  std::vector<double> out;
  for_each_transition(store, Phase::Connecting, Phase::Established, f, [&](const auto& p) {
    out.push_back(static_cast<double>(p.t_end - p.t_start));
  });
  return out;
}

Summary query_establishment_time(const ProfileStore& store, const QueryFilter& f) {
  return summarize(establishment_times(store, f));
}

Ratio query_syn_retransmission_ratio(const ProfileStore& store, const QueryFilter& f) {
  Ratio r;
  for_each_transition(store, Phase::Connecting, Phase::Established, f, [&](const auto& p) {
    ++r.total;
    if (p.kpis.stalls.value_or(0) >= 1) ++r.matching;
  });
  if (r.total > 0) r.ratio = static_cast<double>(r.matching) / static_cast<double>(r.total);
  return r;
}

std::vector<double> jitter_values(const ProfileStore& store, const QueryFilter& f) {
  std::vector<std::pair<std::size_t, double>> hits;
  for (Phase from : {Phase::Established, Phase::Lossy}) {
    for (Phase to : kAllPhases) {
      for (auto i : store.select(from, to, f.ip_version)) {
        const auto& p = store.entries()[i].profile;
        if (!counts(p, f) || !p.kpis.rtt || p.kpis.rtt->count == 0) continue;
        hits.emplace_back(i, static_cast<double>(p.kpis.rtt->variance));
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  std::vector<double> out;
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

Summary query_jitter(const ProfileStore& store, const QueryFilter& f) {
  return summarize(jitter_values(store, f));
}

std::optional<QueryKind> query_kind_from_string(std::string_view s) {
  if (s == "establishment") return QueryKind::Establishment;
  if (s == "syn-retrans") return QueryKind::SynRetrans;
  if (s == "jitter") return QueryKind::Jitter;
  return std::nullopt;
}

std::optional<GroupBy> group_by_from_string(std::string_view s) {
  if (s == "none") return GroupBy::None;
  if (s == "ip-version") return GroupBy::IpVersion;
  if (s == "prefix") return GroupBy::Prefix;
  return std::nullopt;
}

std::vector<ReportRow> run_report(const ProfileStore& store, const ReportOptions& opt,
                                  const QueryFilter& f) {
  // Partition the store by group, then run the query on each part.
  std::map<GroupKey, ProfileStore> parts;
  if (opt.group_by == GroupBy::None) parts[group_of({}, opt)];
  for (const auto& s : store.entries()) {
    if (s.profile.key.transport == Transport::MptcpMeta || !f.matches(s.profile)) continue;
    parts[group_of(s.profile, opt)].append(s);
  }

  std::vector<ReportRow> rows;
  for (const auto& [key, part] : parts) {
    ReportRow row;
    row.group = key.label;
    switch (opt.kind) {
      case QueryKind::Establishment: {
        auto ms = establishment_times(part, f);
        for (auto& v : ms) v /= 1e6;
        row.summary = summarize(std::move(ms));
        break;
      }
      case QueryKind::SynRetrans:
        row.ratio = query_syn_retransmission_ratio(part, f);
        break;
      case QueryKind::Jitter:
        row.summary = query_jitter(part, f);
        break;
    }
    const bool empty = opt.kind == QueryKind::SynRetrans ? row.ratio.total == 0 : row.summary.count == 0;
    if (empty && opt.group_by != GroupBy::None) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string format_report(const std::vector<ReportRow>& rows, const ReportOptions& opt) {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  switch (opt.kind) {
    case QueryKind::Establishment:
      header = {"group", "count", "median_ms", "mean_ms", "variance_ms2"};
      break;
    case QueryKind::SynRetrans:
      header = {"group", "count", "syn_retrans", "ratio"};
      break;
    case QueryKind::Jitter:
      header = {"group", "count", "median_us2", "mean_us2", "variance_us4"};
      break;
  }
  for (const auto& r : rows) {
    if (opt.kind == QueryKind::SynRetrans) {
      cells.push_back({r.group, std::to_string(r.ratio.total), std::to_string(r.ratio.matching),
                       fixed6(r.ratio.ratio)});
    } else {
      cells.push_back({r.group, std::to_string(r.summary.count), fixed6(r.summary.median),
                       fixed6(r.summary.mean), fixed6(r.summary.variance)});
    }
  }

  std::string out;
  if (opt.csv) {
    auto line = [&](const std::vector<std::string>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
      out += '\n';
    };
    line(header);
    for (const auto& c : cells) line(c);
    return out;
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.size(); ++i) width[i] = std::max(width[i], c[i].size());
  auto line = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += "  ";
      // Group left-aligned, numbers right-aligned.
      const std::string pad(width[i] - v[i].size(), ' ');
      out += i == 0 ? v[i] + pad : pad + v[i];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  line(header);
  for (const auto& c : cells) line(c);
  return out;
}

}  // namespace kpiflow
