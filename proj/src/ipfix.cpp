// SPDX-License-Identifier: Apache-2.0
#include "ipfix.hpp"

#include <algorithm>

#include "error.hpp"

namespace kpiflow::ipfix {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put32(Bytes& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v));
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t at) {
  return (static_cast<std::uint32_t>(get16(b, at)) << 16) | get16(b, at + 2);
}

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(ErrorCode::MalformedMessage, msg);
}

[[noreturn]] void truncated(const std::string& msg) {
  throw Error(ErrorCode::TruncatedSet, msg);
}

std::vector<TemplateRecord> parse_template_set(std::span<const std::uint8_t> body) {
  std::vector<TemplateRecord> out;
  std::size_t pos = 0;
  // Anything shorter than a template record header is padding.
  while (body.size() - pos >= 4) {
    TemplateRecord t;
    t.id = get16(body, pos);
    const std::uint16_t count = get16(body, pos + 2);
    pos += 4;
    if (t.id == 0 && count == 0) break;  // zero padding
    if (t.id < kMinDataSetId) malformed("template id " + std::to_string(t.id) + " is reserved");
    for (std::uint16_t i = 0; i < count; ++i) {
      if (body.size() - pos < 4) truncated("template " + std::to_string(t.id) + " cut short");
      FieldSpec f;
      const std::uint16_t raw = get16(body, pos);
      f.element_id = raw & static_cast<std::uint16_t>(~kEnterpriseBit);
      f.length = get16(body, pos + 2);
      pos += 4;
      if (raw & kEnterpriseBit) {
        if (body.size() - pos < 4) truncated("template " + std::to_string(t.id) + " cut short");
        f.enterprise = get32(body, pos);
        pos += 4;
      }
      if (f.length == 0xFFFF) malformed("variable-length fields are not supported");
      t.fields.push_back(f);
    }
    if (!t.fields.empty() && t.record_length() == 0)
      malformed("template " + std::to_string(t.id) + " has zero record length");
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::size_t TemplateRecord::record_length() const {
  std::size_t n = 0;
  for (const auto& f : fields) n += f.length;
  return n;
}

std::size_t TemplateRecord::wire_size() const {
  std::size_t n = 4;
  for (const auto& f : fields) n += f.wire_size();
  return n;
}

std::size_t Message::data_record_count() const {
  std::size_t n = 0;
  for (const auto& s : sets) {
    if (const auto* d = std::get_if<DataSet>(&s)) n += d->records.size();
  }
  return n;
}

std::size_t set_wire_size(const Set& s) {
  return std::visit(overloaded{
                        [](const TemplateSet& t) {
                          std::size_t n = kSetHeaderSize;
                          for (const auto& r : t.templates) n += r.wire_size();
                          return n;
                        },
                        [](const DataSet& d) {
                          std::size_t n = kSetHeaderSize;
                          for (const auto& r : d.records) n += r.size();
                          return n;
                        },
                    },
                    s);
}

std::size_t message_wire_size(const Message& m) {
  std::size_t n = kMessageHeaderSize;
  for (const auto& s : m.sets) n += set_wire_size(s);
  return n;
}

Bytes encode(const Message& m, std::span<const TemplateRecord> announced) {
  const std::size_t total = message_wire_size(m);
  if (total > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "message exceeds 65535 bytes");

  auto lookup = [&](std::uint16_t id) -> const TemplateRecord* {
    for (const auto& s : m.sets) {
      if (const auto* t = std::get_if<TemplateSet>(&s)) {
        for (const auto& r : t->templates)
          if (r.id == id) return &r;
      }
    }
    for (const auto& r : announced)
      if (r.id == id) return &r;
    return nullptr;
  };

  Bytes out;
  out.reserve(total);
  put16(out, kVersion);
  put16(out, static_cast<std::uint16_t>(total));
  put32(out, m.export_time);
  put32(out, m.sequence);
  put32(out, m.observation_domain);

  for (const auto& s : m.sets) {
    const auto len = static_cast<std::uint16_t>(set_wire_size(s));
    if (const auto* t = std::get_if<TemplateSet>(&s)) {
      put16(out, kTemplateSetId);
      put16(out, len);
      for (const auto& r : t->templates) {
        if (r.id < kMinDataSetId)
          throw Error(ErrorCode::InvalidArgument, "template id below 256");
        put16(out, r.id);
        put16(out, static_cast<std::uint16_t>(r.fields.size()));
        for (const auto& f : r.fields) {
          put16(out, f.enterprise ? static_cast<std::uint16_t>(f.element_id | kEnterpriseBit)
                                  : f.element_id);
          put16(out, f.length);
          if (f.enterprise) put32(out, *f.enterprise);
        }
      }
    } else {
      const auto& d = std::get<DataSet>(s);
      const auto* tpl = lookup(d.template_id);
      if (!tpl || tpl->fields.empty())
        throw Error(ErrorCode::UnknownTemplate,
                    "data set for unannounced template " + std::to_string(d.template_id));
      put16(out, d.template_id);
      put16(out, len);
      for (const auto& r : d.records) {
        if (r.size() != tpl->record_length())
          throw Error(ErrorCode::FieldLengthMismatch,
                      "record of " + std::to_string(r.size()) + " bytes for template " +
                          std::to_string(d.template_id) + " (" +
                          std::to_string(tpl->record_length()) + " bytes)");
        out.insert(out.end(), r.begin(), r.end());
      }
    }
  }
  return out;
}

const TemplateRecord* TemplateCache::find(const TemplateKey& key) const {
  auto it = templates_.find(key);
  return it == templates_.end() ? nullptr : &it->second;
}

void TemplateCache::install(const TemplateKey& key, const TemplateRecord& tpl) {
  templates_[key] = tpl;
  auto it = retained_.find(key);
  if (it == retained_.end()) return;
  const std::size_t len = tpl.record_length();
  for (const auto& body : it->second) undecodable_records_ += body.size() / len;
  retained_.erase(it);
}

void TemplateCache::withdraw(const TemplateKey& key) { templates_.erase(key); }

void TemplateCache::retain(const TemplateKey& key, Bytes set_body) {
  retained_[key].push_back(std::move(set_body));
}

std::size_t TemplateCache::retained_sets() const {
  std::size_t n = 0;
  for (const auto& [k, v] : retained_) n += v.size();
  return n;
}

DecodeResult decode(std::span<const std::uint8_t> bytes, const std::string& peer,
                    TemplateCache& cache) {
  if (bytes.size() < kMessageHeaderSize) malformed("message shorter than its header");
  if (get16(bytes, 0) != kVersion)
    malformed("unsupported version " + std::to_string(get16(bytes, 0)));
  const std::size_t length = get16(bytes, 2);
  if (length != bytes.size())
    malformed("length field " + std::to_string(length) + " but " +
              std::to_string(bytes.size()) + " bytes received");

  DecodeResult r;
  r.export_time = get32(bytes, 4);
  r.sequence = get32(bytes, 8);
  r.observation_domain = get32(bytes, 12);

  // Work on a copy so a bad set leaves the cache untouched.
  TemplateCache next = cache;
  std::size_t pos = kMessageHeaderSize;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < kSetHeaderSize) truncated("set header cut short");
    const std::uint16_t id = get16(bytes, pos);
    const std::uint16_t len = get16(bytes, pos + 2);
    if (len < kSetHeaderSize || len > bytes.size() - pos)
      truncated("set " + std::to_string(id) + " length " + std::to_string(len) +
                " does not fit the message");
    const auto body = bytes.subspan(pos + kSetHeaderSize, len - kSetHeaderSize);
    pos += len;

    if (id == kTemplateSetId) {
      for (auto& t : parse_template_set(body)) {
        TemplateKey key{peer, r.observation_domain, t.id};
        if (t.fields.empty()) {
          next.withdraw(key);
        } else {
          next.install(key, t);
        }
        r.templates.push_back(std::move(t));
      }
    } else if (id < kMinDataSetId) {
      ++r.skipped_sets;
    } else {
      TemplateKey key{peer, r.observation_domain, id};
      const auto* tpl = next.find(key);
      if (!tpl) {
        next.retain(key, Bytes(body.begin(), body.end()));
        ++r.unknown_template_sets;
        continue;
      }
      const std::size_t rl = tpl->record_length();
      for (std::size_t off = 0; off + rl <= body.size(); off += rl)
        r.records.push_back({*tpl, Bytes(body.begin() + off, body.begin() + off + rl)});
    }
  }
  cache = std::move(next);
  return r;
}

std::vector<SetHeader> set_headers(std::span<const std::uint8_t> bytes) {
  std::vector<SetHeader> out;
  if (bytes.size() < kMessageHeaderSize) malformed("message shorter than its header");
  std::size_t pos = kMessageHeaderSize;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < kSetHeaderSize) truncated("set header cut short");
    SetHeader h{get16(bytes, pos), get16(bytes, pos + 2)};
    if (h.length < kSetHeaderSize || h.length > bytes.size() - pos) truncated("bad set length");
    out.push_back(h);
    pos += h.length;
  }
  return out;
}

}  // namespace kpiflow::ipfix
