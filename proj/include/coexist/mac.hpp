// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coexist/radio.hpp"
#include "coexist/rlc.hpp"
#include "coexist/types.hpp"

namespace coexist::mac {

struct SchedRequest {
  int device_id = 0;
  Bearer bearer = Bearer::kUrllc;
  Direction direction = Direction::kUl;
  int64_t queued_bytes = 0;       // RLC occupancy including per-PDU headers
  double sinr_estimate_db = 0.0;  // link-adaptation input
};

struct HarqProcess {
  uint64_t id = 0;
  int device_id = 0;
  Bearer bearer = Bearer::kUrllc;
  int64_t tb_bits = 0;
  radio::McsEntry mcs;
  int prb_count = 0;
  int tx_count = 0;
  int max_tx = 1;
  int64_t ready_tti = -1;  // earliest TTI for a retransmission; -1 while awaiting feedback
  std::vector<rlc::RlcPdu> payload;
};

enum class HarqResult : uint8_t { kDelivered, kRetransmit, kDropped };

/// Pure verdict on one feedback message; bumps nothing.
HarqResult harq_verdict(const HarqProcess& p, bool ack);

struct Grant {
  int device_id = 0;
  Bearer bearer = Bearer::kUrllc;
  radio::PrbRange prbs;
  radio::McsEntry mcs;
  int64_t tb_bits = 0;
  bool new_data = true;
  uint64_t harq_id = 0;
};

struct TtiAllocation {
  int64_t tti = 0;
  int cell = 0;
  Direction direction = Direction::kUl;
  std::vector<Grant> grants;

  int used_prbs() const;
};

struct MacParams {
  int prbs = 106;
  double overhead = 0.14;
  double bler_slope_db = 0.5;
  double bler_target_urllc = 0.01;
  double bler_target_ai = 0.1;
  int harq_rtt_tti = 4;
  int max_tx_urllc = 3;
  int max_tx_ai = 10;
};

/// Scheduler for one (cell, direction). Allocation order per TTI:
/// pending HARQ retransmissions (URLLC before AI), new URLLC data, new AI
/// data; round-robin within each class with pointers that persist across
/// TTIs. PRBs are granted contiguously from PRB 0 until exhausted.
class CellScheduler {
 public:
  CellScheduler(int cell, Direction dir, MacParams params);

  int cell() const { return cell_; }
  Direction direction() const { return dir_; }
  const MacParams& params() const { return params_; }

  TtiAllocation schedule_tti(int64_t tti, std::span<const SchedRequest> requests);

  HarqProcess& process(uint64_t id) { return processes_.at(id); }
  const HarqProcess* find(uint64_t id) const;

  /// Applies feedback for a transmission made at `tti`. Delivered and
  /// dropped processes are removed and returned through `done`.
  HarqResult on_harq_feedback(uint64_t id, bool ack, int64_t tti, HarqProcess* done = nullptr);

  /// Forgets a process whose grant carried no payload.
  void discard(uint64_t id) { processes_.erase(id); }

  /// Drops every HARQ process owned by (device, bearer).
  void flush(int device_id, Bearer bearer);

  size_t active_processes() const { return processes_.size(); }
  std::vector<const HarqProcess*> pending_retx(int64_t tti) const;

 private:
  int cell_;
  Direction dir_;
  MacParams params_;
  uint64_t next_harq_id_ = 1;
  std::map<uint64_t, HarqProcess> processes_;
  // Round-robin pointers: last served device per class.
  int last_retx_[2] = {-1, -1};
  int last_new_[2] = {-1, -1};
};

/// Literal strict-priority check: flags an allocation carrying a new-data AI
/// grant while some URLLC request went ungranted and at least one PRB was
/// still free after every URLLC and retransmission grant. Empty when clean.
std::string check_strict_priority(const TtiAllocation& alloc, std::span<const SchedRequest> requests,
                                  int total_prbs);

/// PRB disjointness and budget. Empty when clean.
std::string check_prb_budget(const TtiAllocation& alloc, int total_prbs);

}  // namespace coexist::mac
