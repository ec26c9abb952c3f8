// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ipfix.hpp"
#include "profile_codec.hpp"

namespace kpiflow {

inline constexpr std::size_t kDefaultMtu = 1500;
inline constexpr std::size_t kMinMtu = 576;
inline constexpr Timestamp kDefaultIdleFlushNs = 5'000'000'000ull;
inline constexpr std::uint32_t kDefaultTemplateResend = 20;

// Data records waiting for a message. Records of the same template that
// arrive back to back share a set; order is preserved.
struct PendingBatch {
  std::vector<ipfix::DataSet> sets;
  std::size_t records = 0;
};

class ExportBuffer {
 public:
  explicit ExportBuffer(std::size_t mtu = kDefaultMtu) : mtu_(mtu) {}

  // Buffers the record. When it would not fit, the records buffered so far
  // come back as one batch and the new record starts the next one. Throws
  // RecordTooLarge when the record cannot fit any message.
  std::optional<PendingBatch> add(std::uint16_t template_id, ipfix::Bytes record, Timestamp now);

  // Releases the buffer once its oldest record has waited `idle` or more.
  std::optional<PendingBatch> poll(Timestamp now, Timestamp idle);
  std::optional<PendingBatch> flush();

  // Size the pending message would have on the wire (header included).
  std::size_t wire_size() const { return size_; }
  std::size_t pending_records() const { return batch_.records; }
  std::size_t mtu() const { return mtu_; }

 private:
  PendingBatch take();

  std::size_t mtu_;
  PendingBatch batch_;
  std::size_t size_ = ipfix::kMessageHeaderSize;
  std::optional<Timestamp> oldest_;
};

struct ExportConfig {
  std::size_t mtu = kDefaultMtu;
  std::uint32_t observation_domain = 1;
  std::uint32_t enterprise_number = kDefaultEnterpriseNumber;
  Timestamp idle_flush_ns = kDefaultIdleFlushNs;
  std::uint32_t template_resend = kDefaultTemplateResend;  // data messages
  std::optional<std::uint32_t> export_time;  // wall clock when unset
};

struct ExporterStats {
  std::uint64_t data_messages = 0;
  std::uint64_t template_messages = 0;
  std::uint64_t records = 0;
};

// Turns profiles into complete IPFIX messages. Templates go out in their
// own messages ahead of the first data message and again after every
// `template_resend` data messages.
class ProfileExporter {
 public:
  explicit ProfileExporter(ExportConfig config);

  std::vector<ipfix::Bytes> submit(const PerformanceProfile& p, Timestamp now);
  std::vector<ipfix::Bytes> poll(Timestamp now);
  std::vector<ipfix::Bytes> flush();

  const ExporterStats& stats() const { return stats_; }
  const ExportConfig& config() const { return config_; }
  std::size_t pending_records() const { return buffer_.pending_records(); }

 private:
  void emit(PendingBatch batch, std::vector<ipfix::Bytes>& out);
  void emit_templates(std::vector<ipfix::Bytes>& out);
  std::uint32_t export_time() const;

  ExportConfig config_;
  std::vector<ipfix::TemplateRecord> templates_;
  ExportBuffer buffer_;
  std::uint32_t sequence_ = 0;
  std::uint64_t since_templates_ = 0;
  bool templates_sent_ = false;
  ExporterStats stats_;
};

}  // namespace kpiflow
