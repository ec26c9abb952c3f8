// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>

#include "ipfix.hpp"
#include "store.hpp"
#include "udp.hpp"

namespace kpiflow {

inline constexpr std::uint16_t kDefaultCollectorPort = 4739;

struct CollectorStats {
  std::uint64_t datagrams = 0;
  std::uint64_t appended = 0;
  std::uint64_t malformed = 0;          // rejected datagrams
  std::uint64_t unknown_template_sets = 0;
  std::uint64_t undecodable_records = 0;  // data that preceded its template
  std::uint64_t foreign_records = 0;     // templates that are not profiles
};

// Decodes IPFIX datagrams into a profile store. Garbage is counted, never
// thrown.
class Collector {
 public:
  explicit Collector(std::uint32_t enterprise_number,
                     std::optional<std::filesystem::path> store_path = std::nullopt);

  // Returns the number of profiles appended from this datagram.
  std::size_t ingest(std::span<const std::uint8_t> datagram, const std::string& peer,
                     std::uint64_t received_at_ns);

  // Receives until `max_datagrams` arrived (0: unlimited) or nothing came
  // for `idle_timeout`. Returns the number of datagrams received.
  std::uint64_t serve(UdpSocket& socket, std::uint64_t max_datagrams,
                      std::chrono::milliseconds idle_timeout);

  const ProfileStore& store() const { return store_; }
  CollectorStats stats() const;
  const ipfix::TemplateCache& templates() const { return cache_; }

 private:
  std::uint32_t pen_;
  ipfix::TemplateCache cache_;
  ProfileStore store_;
  std::optional<std::ofstream> out_;
  CollectorStats stats_;
};

std::uint64_t wall_clock_ns();

}  // namespace kpiflow
