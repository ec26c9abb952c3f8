// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "profile.hpp"

namespace kpiflow {

struct ReceiveInfo {
  std::string peer;
  std::uint64_t received_at_ns = 0;  // wall clock, Unix epoch

  friend bool operator==(const ReceiveInfo&, const ReceiveInfo&) = default;
};

struct StoredProfile {
  PerformanceProfile profile;
  std::optional<ReceiveInfo> rx;  // absent for locally replayed profiles

  friend bool operator==(const StoredProfile&, const StoredProfile&) = default;
};

// One JSON object per line, keys in a fixed order.
std::string to_store_line(const StoredProfile& s);
// Throws InvalidArgument on anything that is not a well-formed store line.
StoredProfile from_store_line(std::string_view line);

// Append-only profile sequence with an index by (from phase, to phase,
// IP version).
class ProfileStore {
 public:
  using IndexKey = std::tuple<Phase, Phase, int>;

  void append(StoredProfile s);

  const std::vector<StoredProfile>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<IndexKey, std::vector<std::size_t>>& index() const { return index_; }

  // Positions of profiles with the given transition, in append order.
  std::vector<std::size_t> select(Phase from, Phase to, std::optional<int> ip_version) const;

  void write(std::ostream& out) const;

  // Reads a store file. Blank lines are skipped; a bad line throws
  // InvalidArgument naming the line number. A missing file throws Io.
  static ProfileStore load(const std::filesystem::path& path);
  static ProfileStore parse(std::istream& in);

 private:
  std::vector<StoredProfile> entries_;
  std::map<IndexKey, std::vector<std::size_t>> index_;
};

}  // namespace kpiflow
