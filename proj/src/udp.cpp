// SPDX-License-Identifier: Apache-2.0
#include "udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "error.hpp"

namespace kpiflow {

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
  throw Error(ErrorCode::Socket, what + ": " + std::strerror(errno));
}

socklen_t to_sockaddr(const Endpoint& ep, sockaddr_storage& ss) {
  std::memset(&ss, 0, sizeof ss);
  if (ep.addr.family() == IpFamily::V4) {
    auto* sin = reinterpret_cast<sockaddr_in*>(&ss);
    sin->sin_family = AF_INET;
    sin->sin_port = htons(ep.port);
    std::memcpy(&sin->sin_addr, ep.addr.data(), 4);
    return sizeof(sockaddr_in);
  }
  auto* sin6 = reinterpret_cast<sockaddr_in6*>(&ss);
  sin6->sin6_family = AF_INET6;
  sin6->sin6_port = htons(ep.port);
  std::memcpy(&sin6->sin6_addr, ep.addr.data(), 16);
  return sizeof(sockaddr_in6);
}

Endpoint from_sockaddr(const sockaddr_storage& ss) {
  Endpoint ep;
  if (ss.ss_family == AF_INET) {
    const auto* sin = reinterpret_cast<const sockaddr_in*>(&ss);
    std::array<std::uint8_t, 4> b{};
    std::memcpy(b.data(), &sin->sin_addr, 4);
    ep.addr = IpAddress::v4(b);
    ep.port = ntohs(sin->sin_port);
  } else {
    const auto* sin6 = reinterpret_cast<const sockaddr_in6*>(&ss);
    std::array<std::uint8_t, 16> b{};
    std::memcpy(b.data(), &sin6->sin6_addr, 16);
    ep.addr = IpAddress::v6(b);
    ep.port = ntohs(sin6->sin6_port);
  }
  return ep;
}

int make_socket(IpFamily family) {
  const int fd = ::socket(family == IpFamily::V4 ? AF_INET : AF_INET6, SOCK_DGRAM, 0);
  if (fd < 0) sys_fail("socket");
  return fd;
}

}  // namespace

UdpSocket UdpSocket::open(IpFamily family) { return UdpSocket(make_socket(family)); }

UdpSocket UdpSocket::bind(const Endpoint& local) {
  UdpSocket s(make_socket(local.addr.family()));
  const int one = 1;
  ::setsockopt(s.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  // Collectors see many exporters; a larger buffer avoids loss under bursts.
  const int rcvbuf = 4 << 20;
  ::setsockopt(s.fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof rcvbuf);
  sockaddr_storage ss;
  const auto len = to_sockaddr(local, ss);
  if (::bind(s.fd_, reinterpret_cast<sockaddr*>(&ss), len) != 0)
    sys_fail("bind " + local.to_string());
  return s;
}

UdpSocket& UdpSocket::operator=(UdpSocket&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSocket::send_to(std::span<const std::uint8_t> bytes, const Endpoint& to) {
  sockaddr_storage ss;
  const auto len = to_sockaddr(to, ss);
  const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&ss), len);
  if (n < 0) sys_fail("sendto " + to.to_string());
  if (static_cast<std::size_t>(n) != bytes.size())
    throw Error(ErrorCode::Socket, "short datagram send to " + to.to_string());
}

std::optional<Datagram> UdpSocket::receive(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int r = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (r < 0) {
    if (errno == EINTR) return std::nullopt;
    sys_fail("poll");
  }
  if (r == 0) return std::nullopt;
  Datagram d;
  d.bytes.resize(65535);
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  const auto n = ::recvfrom(fd_, d.bytes.data(), d.bytes.size(), 0,
                            reinterpret_cast<sockaddr*>(&ss), &len);
  if (n < 0) sys_fail("recvfrom");
  d.bytes.resize(static_cast<std::size_t>(n));
  d.peer = from_sockaddr(ss);
  return d;
}

Endpoint UdpSocket::local_endpoint() const {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&ss), &len) != 0) sys_fail("getsockname");
  return from_sockaddr(ss);
}

}  // namespace kpiflow
