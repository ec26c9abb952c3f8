// SPDX-License-Identifier: Apache-2.0
#include "collector.hpp"

#include <algorithm>

#include "error.hpp"
#include "profile_codec.hpp"

namespace kpiflow {

namespace {

bool is_profile_template(const ipfix::TemplateRecord& t, std::uint32_t pen) {
  return std::any_of(t.fields.begin(), t.fields.end(), [&](const ipfix::FieldSpec& f) {
    return f.enterprise && *f.enterprise == pen && f.element_id == 1;  // connectionUid
  });
}

}  // namespace

std::uint64_t wall_clock_ns() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

Collector::Collector(std::uint32_t enterprise_number, std::optional<std::filesystem::path> store_path)
    : pen_(enterprise_number) {
  if (store_path) {
    out_.emplace(*store_path, std::ios::app);
    if (!*out_) throw Error(ErrorCode::Io, "cannot open store " + store_path->string());
  }
}

std::size_t Collector::ingest(std::span<const std::uint8_t> datagram, const std::string& peer,
                              std::uint64_t received_at_ns) {
  ++stats_.datagrams;
  std::vector<StoredProfile> decoded;
  try {
    auto result = ipfix::decode(datagram, peer, cache_);
    stats_.unknown_template_sets += result.unknown_template_sets;
    for (const auto& r : result.records) {
      if (!is_profile_template(r.tpl, pen_)) {
        ++stats_.foreign_records;
        continue;
      }
      decoded.push_back({decode_profile(r.tpl, r.bytes, pen_), ReceiveInfo{peer, received_at_ns}});
    }
  } catch (const Error&) {
    ++stats_.malformed;
    return 0;
  }
  for (auto& s : decoded) {
    if (out_) *out_ << to_store_line(s) << '\n';
    store_.append(std::move(s));
  }
  if (out_) out_->flush();
  stats_.appended += decoded.size();
  return decoded.size();
}

std::uint64_t Collector::serve(UdpSocket& socket, std::uint64_t max_datagrams,
                               std::chrono::milliseconds idle_timeout) {
  std::uint64_t received = 0;
  while (max_datagrams == 0 || received < max_datagrams) {
    auto d = socket.receive(idle_timeout);
    if (!d) break;
    ++received;
    ingest(d->bytes, d->peer.to_string(), wall_clock_ns());
  }
  return received;
}

CollectorStats Collector::stats() const {
  CollectorStats s = stats_;
  s.undecodable_records = cache_.undecodable_records();
  return s;
}

}  // namespace kpiflow
