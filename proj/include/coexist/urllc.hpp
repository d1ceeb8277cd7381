// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coexist/metrics.hpp"
#include "coexist/time.hpp"
#include "coexist/types.hpp"

namespace coexist::urllc {

struct UrllcFlowCfg {
  Direction direction = Direction::kUl;
  SimTime period = SimTime::from_ms(5);
  int64_t size_bytes = 64;
  SimTime delay_bound = SimTime::from_ms(6);
  SimTime survival_time = SimTime::from_ms(5);
  SimTime phase;

  void validate() const;
};

/// Default uplink flow: 64 B every 5 ms, 6 ms bound.
UrllcFlowCfg default_ul_flow();
/// Default downlink flow: 80 B every 5 ms, 2 ms bound.
UrllcFlowCfg default_dl_flow();

/// Generation instants phase + m * period strictly before the horizon.
std::vector<SimTime> generate(const UrllcFlowCfg& flow, SimTime horizon);

struct PacketRecord {
  int device_id = 0;
  Direction direction = Direction::kUl;
  SimTime gen_time;
  SimTime deadline;
  std::optional<SimTime> delivery_time;

  bool on_time() const { return delivery_time && *delivery_time <= deadline; }
};

/// The X transition implied by a resolved packet: 1 at delivery when on
/// time, otherwise 0 at the deadline.
metrics::Transition outcome_transition(const PacketRecord& pkt);

struct PacketCounters {
  uint64_t generated = 0;
  uint64_t on_time = 0;
  uint64_t failed = 0;
  uint64_t late = 0;  // delivered after the deadline; also counted in failed
};

/// Tracks the packets of one (device, direction) flow and builds X(t).
/// Deliveries and deadlines must be reported in non-decreasing time order.
class FlowMonitor {
 public:
  FlowMonitor(int device_id, const UrllcFlowCfg& flow);

  /// Returns the packet index for the RLC tag.
  uint64_t on_generated(SimTime gen_time);
  void on_delivered(uint64_t index, SimTime t);
  void on_deadline(uint64_t index);

  const std::vector<PacketRecord>& packets() const { return packets_; }
  const PacketCounters& counters() const { return counters_; }
  uint8_t x_now() const { return builder_.current(); }
  metrics::StateTrace x_trace(SimTime horizon) const { return builder_.finish(horizon); }

  /// Packets whose deadline is <= horizon.
  uint64_t due_by(SimTime horizon) const;

 private:
  int device_id_;
  UrllcFlowCfg flow_;
  std::vector<PacketRecord> packets_;
  std::vector<uint8_t> deadline_seen_;
  PacketCounters counters_;
  metrics::TraceBuilder builder_;
};

}  // namespace coexist::urllc
