// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "error.hpp"
#include "exporter.hpp"
#include "fixtures.hpp"
#include "ipfix.hpp"
#include "profile_codec.hpp"

using namespace kpiflow;
using namespace kpiflow::ipfix;

namespace {

std::uint16_t be16(const Bytes& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] << 8 | b[at + 1]);
}
std::uint32_t be32(const Bytes& b, std::size_t at) {
  return static_cast<std::uint32_t>(be16(b, at)) << 16 | be16(b, at + 2);
}

TemplateRecord small_template(std::uint16_t id = 256) {
  return {id, {{1, 4, std::nullopt}, {7, 2, 61440u}}};
}

// Hand-rolled reader kept separate from decode(): checks header fields,
// walks sets and counts data records from template lengths.
struct Walk {
  std::uint16_t version = 0;
  std::size_t length = 0;
  std::uint32_t sequence = 0;
  std::size_t data_records = 0;
  std::size_t templates = 0;
};

Walk walk(const Bytes& b, std::map<std::uint16_t, std::size_t>& lengths) {
  Walk w;
  REQUIRE(b.size() >= 16);
  w.version = be16(b, 0);
  w.length = be16(b, 2);
  w.sequence = be32(b, 8);
  REQUIRE(w.length == b.size());
  std::size_t at = 16;
  while (at < b.size()) {
    REQUIRE(at + 4 <= b.size());
    const auto id = be16(b, at);
    const auto len = be16(b, at + 2);
    REQUIRE(len >= 4);
    REQUIRE(at + len <= b.size());
    const std::size_t end = at + len;
    std::size_t p = at + 4;
    if (id == 2) {
      while (p + 4 <= end) {
        const auto tid = be16(b, p);
        const auto count = be16(b, p + 2);
        p += 4;
        std::size_t rec = 0;
        for (std::size_t i = 0; i < count; ++i) {
          const auto eid = be16(b, p);
          rec += be16(b, p + 2);
          p += (eid & 0x8000) ? 8 : 4;
        }
        lengths[tid] = rec;
        ++w.templates;
      }
      CHECK(p == end);
    } else {
      REQUIRE(id >= 256);
      REQUIRE(lengths.count(id));
      const auto rec = lengths[id];
      // No record may straddle a set boundary.
      CHECK((len - 4) % rec == 0);
      w.data_records += (len - 4) / rec;
    }
    at = end;
  }
  return w;
}

std::vector<Bytes> export_all(const std::vector<PerformanceProfile>& ps, ExportConfig cfg) {
  ProfileExporter ex(cfg);
  std::vector<Bytes> out;
  Timestamp now = 0;
  for (const auto& p : ps) {
    for (auto& m : ex.submit(p, now)) out.push_back(std::move(m));
    now += 1000;
  }
  for (auto& m : ex.flush()) out.push_back(std::move(m));
  return out;
}

}  // namespace

TEST_CASE("message header layout") {
  Message m{0x01020304, 7, 9, {}};
  const auto b = encode(m);
  REQUIRE(b.size() == 16);
  CHECK(b[0] == 0x00);
  CHECK(b[1] == 0x0A);
  CHECK(be16(b, 2) == 16);
  CHECK(be32(b, 4) == 0x01020304);
  CHECK(be32(b, 8) == 7);
  CHECK(be32(b, 12) == 9);
}

TEST_CASE("template set wire image") {
  Message m{0, 0, 1, {TemplateSet{{small_template()}}}};
  const auto b = encode(m);
  // header + set header + (tid, count) + 4-byte IANA field + 8-byte enterprise field
  REQUIRE(b.size() == 16 + 4 + 4 + 4 + 8);
  CHECK(be16(b, 16) == 2);
  CHECK(be16(b, 18) == 20);
  CHECK(be16(b, 20) == 256);
  CHECK(be16(b, 22) == 2);
  CHECK(be16(b, 24) == 1);
  CHECK(be16(b, 26) == 4);
  CHECK(be16(b, 28) == (0x8000 | 7));
  CHECK(be16(b, 30) == 2);
  CHECK(be32(b, 32) == 61440);
  CHECK(small_template().record_length() == 6);
}

TEST_CASE("data set of two records") {
  const auto tpl = small_template();
  const std::size_t L = tpl.record_length();
  Message m{0, 0, 1, {DataSet{256, {Bytes(L, 0xAA), Bytes(L, 0xBB)}}}};
  const auto b = encode(m, std::span(&tpl, 1));
  CHECK(b.size() == 16 + 4 + 2 * L);
  CHECK(be16(b, 2) == b.size());
  CHECK(be16(b, 16) == 256);
  CHECK(be16(b, 18) == 4 + 2 * L);
  CHECK(m.data_record_count() == 2);
}

TEST_CASE("encode rejects inconsistent messages") {
  const auto tpl = small_template();
  Message unknown{0, 0, 1, {DataSet{300, {Bytes(6)}}}};
  CHECK_THROWS_WITH_AS(encode(unknown, std::span(&tpl, 1)), doctest::Contains("template"), Error);
  try {
    encode(unknown);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownTemplate);
  }
  Message bad_len{0, 0, 1, {DataSet{256, {Bytes(5)}}}};
  try {
    encode(bad_len, std::span(&tpl, 1));
    FAIL("expected a length mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FieldLengthMismatch);
  }
}

TEST_CASE("export buffer respects the MTU") {
  ExportBuffer buf(1500);
  const Bytes rec(120, 1);
  // 16 + 4 + 12*120 = 1460 fits; a 13th record would reach 1580.
  for (int i = 0; i < 12; ++i) CHECK_FALSE(buf.add(256, rec, 0));
  CHECK(buf.wire_size() == 1460);
  auto batch = buf.add(256, rec, 0);
  REQUIRE(batch);
  CHECK(batch->records == 12);
  REQUIRE(batch->sets.size() == 1);
  CHECK(batch->sets[0].records.size() == 12);
  CHECK(buf.pending_records() == 1);
  CHECK(buf.wire_size() == 16 + 4 + 120);

  // A change of template opens a new set.
  CHECK_FALSE(buf.add(257, Bytes(100, 2), 0));
  CHECK(buf.wire_size() == 16 + 4 + 120 + 4 + 100);
  auto rest = buf.flush();
  REQUIRE(rest);
  CHECK(rest->sets.size() == 2);
  CHECK_FALSE(buf.flush());
}

TEST_CASE("oversized records are refused") {
  ExportBuffer buf(576);
  try {
    buf.add(256, Bytes(557, 0), 0);
    FAIL("expected RecordTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RecordTooLarge);
  }
  CHECK_FALSE(buf.add(256, Bytes(556, 0), 0));
}

TEST_CASE("idle flush releases a partial message") {
  ExportBuffer buf(1500);
  buf.add(256, Bytes(10, 0), 1'000);
  buf.add(256, Bytes(10, 0), 4'000'000'000);
  CHECK_FALSE(buf.poll(5'000'000'999, kDefaultIdleFlushNs));
  auto b = buf.poll(5'000'001'000, kDefaultIdleFlushNs);
  REQUIRE(b);
  CHECK(b->records == 2);
  CHECK_FALSE(buf.poll(99'000'000'000, kDefaultIdleFlushNs));
}

TEST_CASE("decode rejects malformed input") {
  TemplateCache cache;
  auto code_of = [&](const Bytes& b) {
    try {
      decode(b, "p", cache);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  Bytes ok = encode(Message{0, 0, 1, {TemplateSet{{small_template()}}}});

  Bytes short_hdr(ok.begin(), ok.begin() + 10);
  CHECK(code_of(short_hdr) == ErrorCode::MalformedMessage);
  Bytes v9 = ok;
  v9[1] = 9;
  CHECK(code_of(v9) == ErrorCode::MalformedMessage);
  Bytes long_len = ok;
  long_len[3] += 1;
  CHECK(code_of(long_len) == ErrorCode::MalformedMessage);
  Bytes set_over = ok;
  set_over[19] += 4;
  CHECK(code_of(set_over) == ErrorCode::TruncatedSet);
  Bytes set_tiny = ok;
  set_tiny[18] = 0;
  set_tiny[19] = 3;
  CHECK(code_of(set_tiny) == ErrorCode::TruncatedSet);
  Bytes reserved = ok;
  reserved[20] = 0;
  reserved[21] = 255;
  CHECK(code_of(reserved) == ErrorCode::MalformedMessage);
  Bytes varlen = ok;
  varlen[26] = 0xFF;
  varlen[27] = 0xFF;
  CHECK(code_of(varlen) == ErrorCode::MalformedMessage);
  // Failed decodes leave the cache untouched.
  CHECK(cache.size() == 0);
}

TEST_CASE("data before its template stays undecodable") {
  const auto tpl = small_template();
  TemplateCache cache;
  const auto data = encode(Message{0, 3, 1, {DataSet{256, {Bytes(6, 1), Bytes(6, 2)}}}},
                           std::span(&tpl, 1));
  auto r = decode(data, "p", cache);
  CHECK(r.records.empty());
  CHECK(r.unknown_template_sets == 1);
  CHECK(cache.retained_sets() == 1);

  auto t = decode(encode(Message{0, 3, 1, {TemplateSet{{tpl}}}}), "p", cache);
  CHECK(t.templates.size() == 1);
  CHECK(cache.undecodable_records() == 2);

  auto r2 = decode(data, "p", cache);
  CHECK(r2.records.size() == 2);
  CHECK(r2.sequence == 3);

  // Templates are scoped by exporter and domain.
  CHECK(decode(data, "q", cache).records.empty());
}

TEST_CASE("re-announcing a template is idempotent") {
  const auto tpl = small_template();
  TemplateCache cache;
  const auto msg = encode(Message{0, 0, 1, {TemplateSet{{tpl}}}});
  decode(msg, "p", cache);
  const auto snapshot = cache;
  decode(msg, "p", cache);
  CHECK(cache == snapshot);
  CHECK(cache.size() == 1);

  decode(encode(Message{0, 0, 1, {TemplateSet{{TemplateRecord{256, {}}}}}}), "p", cache);
  CHECK(cache.size() == 0);
}

TEST_CASE("unknown set ids are skipped") {
  Bytes b = encode(Message{0, 0, 1, {TemplateSet{{small_template()}}}});
  b[17] = 3;  // options template set
  TemplateCache cache;
  auto r = decode(b, "p", cache);
  CHECK(r.skipped_sets == 1);
  CHECK(cache.size() == 0);
}

TEST_CASE("profile templates") {
  const auto tpls = profile_templates(kDefaultEnterpriseNumber);
  REQUIRE(tpls.size() == 4);
  CHECK(tpls[0].id == kTemplateTcpV4);
  CHECK(tpls[0].record_length() == 228);
  CHECK(tpls[1].record_length() == 252);
  CHECK(tpls[2].record_length() == 172);
  CHECK(tpls[3].record_length() == 196);
  for (const auto& t : tpls) {
    for (const auto& f : t.fields) {
      const auto* ie = find_ie(f.element_id, f.enterprise.has_value());
      REQUIRE(ie != nullptr);
      CHECK(ie->length == f.length);
      if (f.enterprise) CHECK(*f.enterprise == kDefaultEnterpriseNumber);
    }
  }
}

TEST_CASE("shipped registry matches the codec") {
  std::ifstream in(std::string(KPIFLOW_SHARE_DIR) + "/registry.csv");
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == registry_csv(kDefaultEnterpriseNumber));
}

TEST_CASE("profile records round trip") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto p = testing::random_profile(rng);
    const auto tpl = profile_template(template_for(p), 4242);
    const auto rec = encode_profile(p, 4242);
    REQUIRE(rec.size() == tpl.record_length());
    CHECK(decode_profile(tpl, rec, 4242) == p);
  }
}

TEST_CASE("foreign enterprise elements are ignored") {
  std::mt19937_64 rng(11);
  const auto p = testing::random_profile(rng);
  const auto tpl = profile_template(template_for(p), 4242);
  const auto rec = encode_profile(p, 4242);
  const auto q = decode_profile(tpl, rec, 1);
  CHECK(q.key.uid == 0);
  CHECK(q.key.src == p.key.src);
}

TEST_CASE("exporter output walks cleanly and round trips") {
  std::mt19937_64 rng(3);
  std::vector<PerformanceProfile> ps;
  for (int i = 0; i < 300; ++i) ps.push_back(testing::random_profile(rng));
  ExportConfig cfg;
  cfg.mtu = 576;
  cfg.export_time = 1;
  cfg.template_resend = 5;
  const auto msgs = export_all(ps, cfg);

  std::map<std::uint16_t, std::size_t> lengths;
  std::size_t total = 0;
  std::size_t data_msgs_since_templates = 0;
  bool templates_first = true;
  for (const auto& m : msgs) {
    CHECK(m.size() <= 576);
    const auto w = walk(m, lengths);
    CHECK(w.version == 10);
    if (total == 0 && w.data_records > 0 && lengths.size() < 4) templates_first = false;
    // The sequence number counts data records sent before this message.
    CHECK(w.sequence == total);
    total += w.data_records;
    if (w.templates > 0) {
      data_msgs_since_templates = 0;
    } else {
      ++data_msgs_since_templates;
      CHECK(data_msgs_since_templates <= 5);
    }
  }
  CHECK(templates_first);
  CHECK(total == ps.size());

  TemplateCache cache;
  std::vector<PerformanceProfile> back;
  for (const auto& m : msgs) {
    for (const auto& r : decode(m, "x", cache).records)
      back.push_back(decode_profile(r.tpl, r.bytes, kDefaultEnterpriseNumber));
  }
  CHECK(back == ps);
}

TEST_CASE("nothing to export sends nothing") {
  ExportConfig cfg;
  cfg.export_time = 1;
  ProfileExporter ex(cfg);
  CHECK(ex.poll(100'000'000'000).empty());
  CHECK(ex.flush().empty());
  CHECK(ex.stats().template_messages == 0);
}

TEST_CASE("exporter honours the idle timer") {
  ExportConfig cfg;
  cfg.export_time = 1;
  ProfileExporter ex(cfg);
  const auto ps = testing::profiles_of(load_trace(testing::trace_path("syn_loss.trace")));
  CHECK(ex.submit(ps[0], 0).empty());
  CHECK(ex.poll(kDefaultIdleFlushNs - 1).empty());
  const auto out = ex.poll(kDefaultIdleFlushNs);
  REQUIRE(out.size() == 2);  // templates, then data
  CHECK(ex.stats().template_messages == 1);
  CHECK(ex.stats().data_messages == 1);
  CHECK(ex.stats().records == 1);
}
