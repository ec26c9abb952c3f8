// SPDX-License-Identifier: Apache-2.0
#include "exporter.hpp"

#include <ctime>

#include "error.hpp"
#include "profile_codec.hpp"

namespace kpiflow {

std::optional<PendingBatch> ExportBuffer::add(std::uint16_t template_id, ipfix::Bytes record,
                                              Timestamp now) {
  const std::size_t alone = ipfix::kMessageHeaderSize + ipfix::kSetHeaderSize + record.size();
  if (alone > mtu_)
    throw Error(ErrorCode::RecordTooLarge, "record of " + std::to_string(record.size()) +
                                               " bytes cannot fit a " + std::to_string(mtu_) +
                                               "-byte message");
  auto need = [&] {
    const bool same_set = !batch_.sets.empty() && batch_.sets.back().template_id == template_id;
    return record.size() + (same_set ? 0 : ipfix::kSetHeaderSize);
  };
  std::optional<PendingBatch> out;
  if (size_ + need() > mtu_) out = take();
  size_ += need();
  if (batch_.sets.empty() || batch_.sets.back().template_id != template_id)
    batch_.sets.push_back({template_id, {}});
  batch_.sets.back().records.push_back(std::move(record));
  ++batch_.records;
  if (!oldest_) oldest_ = now;
  return out;
}

std::optional<PendingBatch> ExportBuffer::poll(Timestamp now, Timestamp idle) {
  if (!oldest_ || now < *oldest_ || now - *oldest_ < idle) return std::nullopt;
  return take();
}

std::optional<PendingBatch> ExportBuffer::flush() {
  if (batch_.records == 0) return std::nullopt;
  return take();
}

PendingBatch ExportBuffer::take() {
  PendingBatch b = std::move(batch_);
  batch_ = {};
  size_ = ipfix::kMessageHeaderSize;
  oldest_.reset();
  return b;
}

ProfileExporter::ProfileExporter(ExportConfig config)
    : config_(config),
      templates_(profile_templates(config.enterprise_number)),
      buffer_(config.mtu) {
  if (config_.mtu < kMinMtu || config_.mtu > 0xFFFF)
    throw Error(ErrorCode::InvalidArgument, "mtu must be between 576 and 65535");
}

std::uint32_t ProfileExporter::export_time() const {
  if (config_.export_time) return *config_.export_time;
  return static_cast<std::uint32_t>(std::time(nullptr));
}

std::vector<ipfix::Bytes> ProfileExporter::submit(const PerformanceProfile& p, Timestamp now) {
  std::vector<ipfix::Bytes> out;
  if (auto b = buffer_.poll(now, config_.idle_flush_ns)) emit(std::move(*b), out);
  if (auto b = buffer_.add(template_for(p), encode_profile(p, config_.enterprise_number), now))
    emit(std::move(*b), out);
  return out;
}

std::vector<ipfix::Bytes> ProfileExporter::poll(Timestamp now) {
  std::vector<ipfix::Bytes> out;
  if (auto b = buffer_.poll(now, config_.idle_flush_ns)) emit(std::move(*b), out);
  return out;
}

std::vector<ipfix::Bytes> ProfileExporter::flush() {
  std::vector<ipfix::Bytes> out;
  if (auto b = buffer_.flush()) emit(std::move(*b), out);
  return out;
}

void ProfileExporter::emit_templates(std::vector<ipfix::Bytes>& out) {
  ipfix::Message m{export_time(), sequence_, config_.observation_domain, {}};
  ipfix::TemplateSet set;
  std::size_t size = ipfix::kMessageHeaderSize + ipfix::kSetHeaderSize;
  auto ship = [&] {
    m.sets = {set};
    out.push_back(ipfix::encode(m));
    ++stats_.template_messages;
    set.templates.clear();
    size = ipfix::kMessageHeaderSize + ipfix::kSetHeaderSize;
  };
  for (const auto& t : templates_) {
    if (ipfix::kMessageHeaderSize + ipfix::kSetHeaderSize + t.wire_size() > config_.mtu)
      throw Error(ErrorCode::RecordTooLarge, "template " + std::to_string(t.id) + " exceeds the mtu");
    if (size + t.wire_size() > config_.mtu) ship();
    set.templates.push_back(t);
    size += t.wire_size();
  }
  if (!set.templates.empty()) ship();
  templates_sent_ = true;
  since_templates_ = 0;
}

void ProfileExporter::emit(PendingBatch batch, std::vector<ipfix::Bytes>& out) {
  if (!templates_sent_ || (config_.template_resend > 0 && since_templates_ >= config_.template_resend))
    emit_templates(out);
  ipfix::Message m{export_time(), sequence_, config_.observation_domain, {}};
  for (auto& s : batch.sets) m.sets.emplace_back(std::move(s));
  out.push_back(ipfix::encode(m, templates_));
  sequence_ += static_cast<std::uint32_t>(batch.records);
  stats_.records += batch.records;
  ++stats_.data_messages;
  ++since_templates_;
}

}  // namespace kpiflow
