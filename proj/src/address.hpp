// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kpiflow {

enum class IpFamily : std::uint8_t { V4 = 4, V6 = 6 };

// IPv4 or IPv6 address in network byte order. V4 addresses occupy the first
// four bytes; the remaining bytes stay zero so equality is bytewise.
class IpAddress {
 public:
  IpAddress() = default;

  static std::optional<IpAddress> parse(std::string_view text);
  static IpAddress v4(std::array<std::uint8_t, 4> bytes);
  static IpAddress v6(std::array<std::uint8_t, 16> bytes);

  IpFamily family() const { return family_; }
  int version() const { return static_cast<int>(family_); }
  std::size_t size() const { return family_ == IpFamily::V4 ? 4 : 16; }
  const std::uint8_t* data() const { return bytes_.data(); }

  std::string to_string() const;

  // True when the first `prefix_len` bits equal those of `network`.
  bool in_prefix(const IpAddress& network, unsigned prefix_len) const;
  IpAddress masked(unsigned prefix_len) const;

  friend bool operator==(const IpAddress&, const IpAddress&) = default;
  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;

 private:
  IpFamily family_ = IpFamily::V4;
  std::array<std::uint8_t, 16> bytes_{};
};

struct Prefix {
  IpAddress network;
  unsigned length = 0;

  // "192.0.2.0/24" or "2001:db8::/48".
  static std::optional<Prefix> parse(std::string_view text);
  bool contains(const IpAddress& addr) const;
  std::string to_string() const;
};

struct Endpoint {
  IpAddress addr;
  std::uint16_t port = 0;

  // "10.0.0.1:80", "[2001:db8::1]:443" or "2001:db8::1:443" (last colon).
  static std::optional<Endpoint> parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

}  // namespace kpiflow
