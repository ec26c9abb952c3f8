// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "address.hpp"

namespace kpiflow {

struct Datagram {
  std::vector<std::uint8_t> bytes;
  Endpoint peer;
};

class UdpSocket {
 public:
  // Unbound socket for sending to `family` destinations.
  static UdpSocket open(IpFamily family);
  static UdpSocket bind(const Endpoint& local);

  UdpSocket(UdpSocket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  UdpSocket& operator=(UdpSocket&& o) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket();

  void send_to(std::span<const std::uint8_t> bytes, const Endpoint& to);
  // Waits up to `timeout` for one datagram.
  std::optional<Datagram> receive(std::chrono::milliseconds timeout);
  Endpoint local_endpoint() const;

 private:
  explicit UdpSocket(int fd) : fd_(fd) {}
  int fd_ = -1;
};

}  // namespace kpiflow
