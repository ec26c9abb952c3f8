// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "event.hpp"

namespace kpiflow {

// Signed serial-number distance seq - ref, valid while |distance| < 2^(N-1).
inline std::int64_t serial_offset(std::uint32_t seq, std::uint32_t ref) {
  return static_cast<std::int32_t>(seq - ref);
}
inline std::int64_t serial_offset(std::uint64_t seq, std::uint64_t ref) {
  return static_cast<std::int64_t>(seq - ref);
}

// Classify `len` bytes starting `offset` bytes past the next expected byte.
inline Classification classify_offset(std::int64_t offset, std::uint64_t len) {
  const auto slen = static_cast<std::int64_t>(len);
  Classification c;
  if (offset + slen <= 0) {
    c.kind = SegmentClass::Duplicate;
    c.dup_bytes = len;
  } else if (offset < 0) {
    c.kind = SegmentClass::Duplicate;
    c.dup_bytes = static_cast<std::uint64_t>(-offset);
    c.in_order_bytes = len - c.dup_bytes;
  } else if (offset == 0) {
    c.in_order_bytes = len;
  } else {
    c.kind = SegmentClass::OutOfOrder;
    c.ofo_bytes = len;
    c.distance = static_cast<std::uint64_t>(offset);
  }
  return c;
}

// TCP sequence space (mod 2^32).
inline Classification classify(std::uint32_t rcv_nxt, std::uint32_t seq,
                               std::uint64_t len) {
  return classify_offset(serial_offset(seq, rcv_nxt), len);
}

// MPTCP data-sequence space (64 bit).
inline Classification classify_dss(std::uint64_t rcv_nxt, std::uint64_t dss,
                                   std::uint64_t len) {
  return classify_offset(serial_offset(dss, rcv_nxt), len);
}

// Data received ahead of the next expected byte. Each entry may carry a
// data-sequence tag that moves along with the bytes it labels.
template <typename Seq>
class ReorderQueue {
 public:
  struct Delivery {
    std::uint64_t bytes = 0;
    std::optional<std::uint64_t> tag;
  };

  void insert(Seq seq, std::uint64_t len, std::optional<std::uint64_t> tag) {
    entries_.push_back({seq, len, tag});
  }

  // Move every queued byte that has become contiguous with `rcv_nxt` into
  // `out`, advancing `rcv_nxt`. Entries wholly behind `rcv_nxt` are dropped.
  void drain(Seq& rcv_nxt, std::vector<Delivery>& out) {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (auto it = entries_.begin(); it != entries_.end();) {
        const auto off = serial_offset(it->seq, rcv_nxt);
        const auto end = off + static_cast<std::int64_t>(it->len);
        if (end <= 0) {
          it = entries_.erase(it);
        } else if (off <= 0) {
          const auto skip = static_cast<std::uint64_t>(-off);
          const auto fresh = it->len - skip;
          std::optional<std::uint64_t> tag;
          if (it->tag) tag = *it->tag + skip;
          out.push_back({fresh, tag});
          rcv_nxt = static_cast<Seq>(rcv_nxt + fresh);
          it = entries_.erase(it);
          progressed = true;
        } else {
          ++it;
        }
      }
    }
  }

  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    Seq seq;
    std::uint64_t len;
    std::optional<std::uint64_t> tag;
  };
  std::vector<Entry> entries_;
};

}  // namespace kpiflow
