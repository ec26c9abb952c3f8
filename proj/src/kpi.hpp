// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace kpiflow {

using Timestamp = std::uint64_t;  // nanoseconds since trace origin

enum class KpiId : std::uint8_t {
  Sent,
  Received,
  Lost,
  Errors,
  Rtt,
  Duplicates,
  Ofo,
  OfoDist,
  Stalls,
  Reinjections,
  HolBlocking,
};

inline constexpr std::size_t kKpiCount = 11;

enum class KpiKind : std::uint8_t {
  DualCounter,   // bytes and packets
  EventCounter,  // occurrences
  Sampled,       // running mean and variance
};

constexpr KpiKind kind_of(KpiId id) {
  switch (id) {
    case KpiId::Rtt:
    case KpiId::OfoDist:
      return KpiKind::Sampled;
    case KpiId::Stalls:
    case KpiId::Reinjections:
    case KpiId::HolBlocking:
      return KpiKind::EventCounter;
    default:
      return KpiKind::DualCounter;
  }
}

std::string_view to_string(KpiId id);

constexpr std::size_t index(KpiId id) { return static_cast<std::size_t>(id); }

class KpiSet {
 public:
  constexpr KpiSet() = default;
  KpiSet(std::initializer_list<KpiId> ids) {
    for (auto id : ids) bits_.set(index(id));
  }

  bool contains(KpiId id) const { return bits_.test(index(id)); }
  void insert(KpiId id) { bits_.set(index(id)); }
  void erase(KpiId id) { bits_.reset(index(id)); }

  friend bool operator==(const KpiSet&, const KpiSet&) = default;

 private:
  std::bitset<kKpiCount> bits_;
};

// KPI applicability per transport object.
KpiSet tcp_kpis();
KpiSet subflow_kpis();
KpiSet meta_kpis();

struct CounterPair {
  std::uint64_t bytes = 0;
  std::uint64_t packets = 0;

  CounterPair& operator+=(const CounterPair& o) {
    bytes += o.bytes;
    packets += o.packets;
    return *this;
  }
  friend bool operator==(const CounterPair&, const CounterPair&) = default;
};

// Welford running mean / population variance.
class RunningStat {
 public:
  void add(double value) {
    ++count_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (value - mean_);
  }

  void reset() { *this = RunningStat{}; }

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  double variance() const {
    return count_ == 0 ? 0.0 : m2_ / static_cast<double>(count_);
  }

  friend bool operator==(const RunningStat&, const RunningStat&) = default;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Frozen view of an accumulator. Counters are cumulative over the
// connection lifetime; sampled KPIs cover the window since the last reset.
struct KpiSnapshot {
  KpiSet present;
  std::array<CounterPair, kKpiCount> pairs{};
  std::array<std::uint64_t, kKpiCount> events{};
  std::array<RunningStat, kKpiCount> stats{};
  Timestamp taken_at = 0;

  const CounterPair& counter(KpiId id) const { return pairs[index(id)]; }
  std::uint64_t event_count(KpiId id) const { return events[index(id)]; }
  const RunningStat& stat(KpiId id) const { return stats[index(id)]; }

  friend bool operator==(const KpiSnapshot&, const KpiSnapshot&) = default;
};

class KpiAccumulator {
 public:
  explicit KpiAccumulator(KpiSet applicable = tcp_kpis()) : present_(applicable) {}

  // Throws KindMismatch unless `id` is an applicable dual counter.
  void record_counter(KpiId id, std::uint64_t bytes, std::uint64_t packets);
  // Throws KindMismatch unless `id` is an applicable event counter.
  void record_event(KpiId id, std::uint64_t count = 1);
  // Throws KindMismatch unless `id` is an applicable sampled KPI, or
  // InvalidArgument on a negative sample.
  void record_sample(KpiId id, double value);

  const CounterPair& counter(KpiId id) const { return pairs_[index(id)]; }
  std::uint64_t event_count(KpiId id) const { return events_[index(id)]; }
  const RunningStat& stat(KpiId id) const { return stats_[index(id)]; }

  KpiSnapshot snapshot(Timestamp at) const;
  // Restart every sampled KPI; counters keep accumulating.
  void reset_window();

  KpiSet applicable() const { return present_; }
  void enable(KpiId id) { present_.insert(id); }

 private:
  void require(KpiId id, KpiKind kind) const;

  KpiSet present_;
  std::array<CounterPair, kKpiCount> pairs_{};
  std::array<std::uint64_t, kKpiCount> events_{};
  std::array<RunningStat, kKpiCount> stats_{};
};

struct WindowStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;

  friend bool operator==(const WindowStats&, const WindowStats&) = default;
};

struct KpiDelta {
  KpiSet present;
  std::array<CounterPair, kKpiCount> pairs{};
  std::array<std::uint64_t, kKpiCount> events{};
  std::array<WindowStats, kKpiCount> stats{};
  Timestamp t_start = 0;
  Timestamp t_end = 0;

  const CounterPair& counter(KpiId id) const { return pairs[index(id)]; }
  std::uint64_t event_count(KpiId id) const { return events[index(id)]; }
  const WindowStats& stat(KpiId id) const { return stats[index(id)]; }
};

// Counter differences plus the sampled-KPI window held by `after`. A KPI
// present only in `after` is differenced against zero. Throws NegativeDelta
// when a counter decreased and InvalidArgument when the snapshots are out of
// time order.
KpiDelta delta(const KpiSnapshot& before, const KpiSnapshot& after);

}  // namespace kpiflow
