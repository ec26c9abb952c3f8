// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace kpiflow::ipfix {

inline constexpr std::uint16_t kVersion = 10;
inline constexpr std::size_t kMessageHeaderSize = 16;
inline constexpr std::size_t kSetHeaderSize = 4;
inline constexpr std::uint16_t kTemplateSetId = 2;
inline constexpr std::uint16_t kOptionsTemplateSetId = 3;
inline constexpr std::uint16_t kMinDataSetId = 256;
inline constexpr std::uint16_t kEnterpriseBit = 0x8000;

using Bytes = std::vector<std::uint8_t>;

struct FieldSpec {
  std::uint16_t element_id = 0;  // without the enterprise bit
  std::uint16_t length = 0;
  std::optional<std::uint32_t> enterprise;

  std::size_t wire_size() const { return enterprise ? 8 : 4; }
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

struct TemplateRecord {
  std::uint16_t id = 0;
  std::vector<FieldSpec> fields;  // empty: withdrawal

  std::size_t record_length() const;
  std::size_t wire_size() const;
  friend bool operator==(const TemplateRecord&, const TemplateRecord&) = default;
};

struct TemplateSet {
  std::vector<TemplateRecord> templates;
  friend bool operator==(const TemplateSet&, const TemplateSet&) = default;
};

struct DataSet {
  std::uint16_t template_id = 0;
  std::vector<Bytes> records;
  friend bool operator==(const DataSet&, const DataSet&) = default;
};

using Set = std::variant<TemplateSet, DataSet>;

struct Message {
  std::uint32_t export_time = 0;  // seconds
  std::uint32_t sequence = 0;
  std::uint32_t observation_domain = 0;
  std::vector<Set> sets;

  std::size_t data_record_count() const;
  friend bool operator==(const Message&, const Message&) = default;
};

std::size_t set_wire_size(const Set& s);
std::size_t message_wire_size(const Message& m);

// Big-endian wire image. Every data set must refer to a template carried
// in the message itself or listed in `announced` (UnknownTemplate), and
// every record must match its template's length (FieldLengthMismatch).
Bytes encode(const Message& m, std::span<const TemplateRecord> announced = {});

// Keyed by (exporter, observation domain, template id).
struct TemplateKey {
  std::string peer;
  std::uint32_t domain = 0;
  std::uint16_t id = 0;

  friend auto operator<=>(const TemplateKey&, const TemplateKey&) = default;
};

class TemplateCache {
 public:
  const TemplateRecord* find(const TemplateKey& key) const;
  // Installs or replaces a template. Data sets retained for the key become
  // countable now that their record length is known.
  void install(const TemplateKey& key, const TemplateRecord& tpl);
  void withdraw(const TemplateKey& key);

  // Data sets that arrived before their template. They stay undecodable.
  void retain(const TemplateKey& key, Bytes set_body);
  std::size_t retained_sets() const;
  std::uint64_t undecodable_records() const { return undecodable_records_; }

  std::size_t size() const { return templates_.size(); }
  friend bool operator==(const TemplateCache&, const TemplateCache&) = default;

 private:
  std::map<TemplateKey, TemplateRecord> templates_;
  std::map<TemplateKey, std::vector<Bytes>> retained_;
  std::uint64_t undecodable_records_ = 0;
};

struct DecodedRecord {
  TemplateRecord tpl;
  Bytes bytes;
};

struct DecodeResult {
  std::uint32_t export_time = 0;
  std::uint32_t sequence = 0;
  std::uint32_t observation_domain = 0;
  std::vector<TemplateRecord> templates;
  std::vector<DecodedRecord> records;
  std::size_t unknown_template_sets = 0;
  std::size_t skipped_sets = 0;  // options templates and reserved ids
};

// Decodes one complete message from `peer`, updating `cache`. Throws
// MalformedMessage (header) or TruncatedSet (set boundaries).
DecodeResult decode(std::span<const std::uint8_t> bytes, const std::string& peer,
                    TemplateCache& cache);

// Structural view used to cross-check the wire image independently of the
// template cache.
struct SetHeader {
  std::uint16_t id = 0;
  std::uint16_t length = 0;
};
std::vector<SetHeader> set_headers(std::span<const std::uint8_t> bytes);

}  // namespace kpiflow::ipfix
