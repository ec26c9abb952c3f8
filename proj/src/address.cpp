// SPDX-License-Identifier: Apache-2.0
#include "address.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>

namespace kpiflow {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  std::string s(text);
  IpAddress out;
  if (inet_pton(AF_INET, s.c_str(), out.bytes_.data()) == 1) {
    out.family_ = IpFamily::V4;
    return out;
  }
  if (inet_pton(AF_INET6, s.c_str(), out.bytes_.data()) == 1) {
    out.family_ = IpFamily::V6;
    return out;
  }
  return std::nullopt;
}

IpAddress IpAddress::v4(std::array<std::uint8_t, 4> bytes) {
  IpAddress out;
  out.family_ = IpFamily::V4;
  std::memcpy(out.bytes_.data(), bytes.data(), 4);
  return out;
}

IpAddress IpAddress::v6(std::array<std::uint8_t, 16> bytes) {
  IpAddress out;
  out.family_ = IpFamily::V6;
  out.bytes_ = bytes;
  return out;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  inet_ntop(family_ == IpFamily::V4 ? AF_INET : AF_INET6, bytes_.data(), buf,
            sizeof(buf));
  return buf;
}

IpAddress IpAddress::masked(unsigned prefix_len) const {
  IpAddress out = *this;
  const unsigned bits = static_cast<unsigned>(size()) * 8;
  for (unsigned i = 0; i < bits; ++i) {
    if (i >= prefix_len) out.bytes_[i / 8] &= static_cast<std::uint8_t>(~(0x80u >> (i % 8)));
  }
  return out;
}

bool IpAddress::in_prefix(const IpAddress& network, unsigned prefix_len) const {
  if (family_ != network.family_) return false;
  return masked(prefix_len) == network.masked(prefix_len);
}

std::optional<Prefix> Prefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto addr = IpAddress::parse(text.substr(0, slash));
  if (!addr) return std::nullopt;
  unsigned len = 0;
  const auto tail = text.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), len);
  if (ec != std::errc{} || ptr != tail.data() + tail.size()) return std::nullopt;
  if (len > addr->size() * 8) return std::nullopt;
  return Prefix{addr->masked(len), len};
}

bool Prefix::contains(const IpAddress& addr) const {
  return addr.in_prefix(network, length);
}

std::string Prefix::to_string() const {
  return network.to_string() + "/" + std::to_string(length);
}

std::optional<Endpoint> Endpoint::parse(std::string_view text) {
  std::string_view host;
  std::string_view port;
  if (!text.empty() && text.front() == '[') {
    const auto close = text.find(']');
    if (close == std::string_view::npos || close + 1 >= text.size() ||
        text[close + 1] != ':')
      return std::nullopt;
    host = text.substr(1, close - 1);
    port = text.substr(close + 2);
  } else {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  auto addr = IpAddress::parse(host);
  if (!addr) return std::nullopt;
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535)
    return std::nullopt;
  return Endpoint{*addr, static_cast<std::uint16_t>(value)};
}

std::string Endpoint::to_string() const {
  if (addr.family() == IpFamily::V6)
    return "[" + addr.to_string() + "]:" + std::to_string(port);
  return addr.to_string() + ":" + std::to_string(port);
}

}  // namespace kpiflow
