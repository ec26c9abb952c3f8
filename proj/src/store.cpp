// SPDX-License-Identifier: Apache-2.0
#include "store.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "error.hpp"

namespace kpiflow {

namespace {

using json = nlohmann::ordered_json;

json pair_json(const CounterPair& c) { return json{{"bytes", c.bytes}, {"packets", c.packets}}; }

json stat_json(const WindowStat& w) {
  return json{{"count", w.count}, {"mean", w.mean}, {"variance", w.variance}};
}

CounterPair pair_from(const json& j) {
  return CounterPair{j.at("bytes").get<std::uint64_t>(), j.at("packets").get<std::uint64_t>()};
}

WindowStat stat_from(const json& j) {
  return WindowStat{j.at("count").get<std::uint64_t>(), j.at("mean").get<std::uint64_t>(),
                    j.at("variance").get<std::uint64_t>()};
}

IpAddress addr_from(const json& j) {
  const auto s = j.get<std::string>();
  auto a = IpAddress::parse(s);
  if (!a) throw Error(ErrorCode::InvalidArgument, "bad address '" + s + "'");
  return *a;
}

template <class T>
T enum_from(const json& j, std::optional<T> (*parse)(std::string_view), const char* what) {
  const auto s = j.get<std::string>();
  auto v = parse(s);
  if (!v) throw Error(ErrorCode::InvalidArgument, std::string("bad ") + what + " '" + s + "'");
  return *v;
}

}  // namespace

std::string to_store_line(const StoredProfile& s) {
  const auto& p = s.profile;
  json j;
  j["uid"] = p.key.uid;
  j["transport"] = std::string(to_string(p.key.transport));
  if (p.meta_uid) j["meta_uid"] = *p.meta_uid;
  j["src"] = p.key.src.addr.to_string();
  j["src_port"] = p.key.src.port;
  j["dst"] = p.key.dst.addr.to_string();
  j["dst_port"] = p.key.dst.port;
  j["iface"] = p.key.iface;
  j["from"] = std::string(to_string(p.from.phase));
  j["to"] = std::string(to_string(p.to.phase));
  if (auto r = p.end_reason()) j["end_reason"] = std::string(to_string(*r));
  j["t_start"] = p.t_start;
  j["t_end"] = p.t_end;
  j["export_seq"] = p.export_seq;

  const auto& k = p.kpis;
  json kp;
  kp["sent"] = pair_json(k.sent);
  kp["received"] = pair_json(k.received);
  kp["lost"] = pair_json(k.lost);
  if (k.errors) kp["errors"] = pair_json(*k.errors);
  kp["duplicates"] = pair_json(k.duplicates);
  kp["ofo"] = pair_json(k.ofo);
  if (k.rtt) kp["rtt"] = stat_json(*k.rtt);
  kp["ofo_dist"] = stat_json(k.ofo_dist);
  if (k.stalls) kp["stalls"] = *k.stalls;
  if (k.reinjections) kp["reinjections"] = *k.reinjections;
  if (k.hol_blocking) kp["hol_blocking"] = *k.hol_blocking;
  j["kpis"] = std::move(kp);

  if (s.rx) j["rx"] = json{{"peer", s.rx->peer}, {"received_at_ns", s.rx->received_at_ns}};
  return j.dump();
}

StoredProfile from_store_line(std::string_view line) {
  StoredProfile s;
  try {
    const json j = json::parse(line);
    auto& p = s.profile;
    p.key.uid = j.at("uid").get<std::uint64_t>();
    p.key.transport = enum_from<Transport>(j.at("transport"), transport_from_string, "transport");
    if (j.contains("meta_uid")) p.meta_uid = j.at("meta_uid").get<std::uint64_t>();
    p.key.src = Endpoint{addr_from(j.at("src")), j.at("src_port").get<std::uint16_t>()};
    p.key.dst = Endpoint{addr_from(j.at("dst")), j.at("dst_port").get<std::uint16_t>()};
    p.key.iface = j.at("iface").get<std::string>();
    p.from.phase = enum_from<Phase>(j.at("from"), phase_from_string, "state");
    p.to.phase = enum_from<Phase>(j.at("to"), phase_from_string, "state");
    if (p.to.is_closed())
      p.to.end_reason = enum_from<EndReason>(j.at("end_reason"), end_reason_from_string, "end reason");
    p.t_start = j.at("t_start").get<std::uint64_t>();
    p.t_end = j.at("t_end").get<std::uint64_t>();
    p.export_seq = j.at("export_seq").get<std::uint32_t>();

    const auto& kp = j.at("kpis");
    auto& k = p.kpis;
    k.sent = pair_from(kp.at("sent"));
    k.received = pair_from(kp.at("received"));
    k.lost = pair_from(kp.at("lost"));
    if (kp.contains("errors")) k.errors = pair_from(kp.at("errors"));
    k.duplicates = pair_from(kp.at("duplicates"));
    k.ofo = pair_from(kp.at("ofo"));
    if (kp.contains("rtt")) k.rtt = stat_from(kp.at("rtt"));
    k.ofo_dist = stat_from(kp.at("ofo_dist"));
    if (kp.contains("stalls")) k.stalls = kp.at("stalls").get<std::uint64_t>();
    if (kp.contains("reinjections")) k.reinjections = kp.at("reinjections").get<std::uint64_t>();
    if (kp.contains("hol_blocking")) k.hol_blocking = kp.at("hol_blocking").get<std::uint64_t>();

    if (j.contains("rx")) {
      const auto& rx = j.at("rx");
      s.rx = ReceiveInfo{rx.at("peer").get<std::string>(),
                         rx.at("received_at_ns").get<std::uint64_t>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
  return s;
}

void ProfileStore::append(StoredProfile s) {
  const auto& p = s.profile;
  index_[{p.from.phase, p.to.phase, p.ip_version()}].push_back(entries_.size());
  entries_.push_back(std::move(s));
}

std::vector<std::size_t> ProfileStore::select(Phase from, Phase to,
                                              std::optional<int> ip_version) const {
  std::vector<std::size_t> out;
  for (int v : {4, 6}) {
    if (ip_version && *ip_version != v) continue;
    auto it = index_.find({from, to, v});
    if (it != index_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ProfileStore::write(std::ostream& out) const {
  for (const auto& s : entries_) out << to_store_line(s) << '\n';
}

ProfileStore ProfileStore::parse(std::istream& in) {
  ProfileStore store;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      store.append(from_store_line(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, "store line " + std::to_string(n) + ": " + e.what());
    }
  }
  return store;
}

ProfileStore ProfileStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open store " + path.string());
  return parse(in);
}

}  // namespace kpiflow
