// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipfix.hpp"
#include "profile.hpp"

namespace kpiflow {

// Placeholder enterprise number used by tests and as the CLI default. It is
// not an assigned PEN; deployments must configure their own.
inline constexpr std::uint32_t kDefaultEnterpriseNumber = 61440;

inline constexpr std::uint16_t kTemplateTcpV4 = 256;
inline constexpr std::uint16_t kTemplateTcpV6 = 257;
inline constexpr std::uint16_t kTemplateMetaV4 = 258;
inline constexpr std::uint16_t kTemplateMetaV6 = 259;

struct IeInfo {
  std::string_view name;
  std::uint16_t element_id;
  bool enterprise;
  std::uint16_t length;
  std::string_view description;
};

// Every information element a profile record may carry.
std::span<const IeInfo> ie_registry();
const IeInfo* find_ie(std::uint16_t element_id, bool enterprise);

// name,element_id,pen,length,description (pen empty for IANA elements).
std::string registry_csv(std::uint32_t pen);

ipfix::TemplateRecord profile_template(std::uint16_t id, std::uint32_t pen);
std::vector<ipfix::TemplateRecord> profile_templates(std::uint32_t pen);

std::uint16_t template_for(const PerformanceProfile& p);

// Record body laid out by profile_template(template_for(p), pen).
ipfix::Bytes encode_profile(const PerformanceProfile& p, std::uint32_t pen);

// Decodes a record laid out by `tpl`. Elements from other enterprises are
// skipped. Optional KPIs are present when the template carries them and
// they apply to the decoded transport.
PerformanceProfile decode_profile(const ipfix::TemplateRecord& tpl,
                                  std::span<const std::uint8_t> record, std::uint32_t pen);

}  // namespace kpiflow
