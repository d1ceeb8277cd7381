// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coexist/config.hpp"
#include "coexist/fl.hpp"
#include "coexist/metrics.hpp"
#include "coexist/rlc.hpp"
#include "coexist/urllc.hpp"

namespace coexist {

struct UrllcDeviceResult {
  int device_id = 0;
  int cell = 0;
  double avail_ul = 1.0;
  double avail_dl = 1.0;
  double avail_combined = 1.0;
  urllc::PacketCounters ul;
  urllc::PacketCounters dl;
  uint64_t ul_due = 0;  // packets whose deadline falls inside the horizon
  uint64_t dl_due = 0;
};

struct AllocationTraceRow {
  int64_t tti = 0;
  int cell = 0;
  Direction direction = Direction::kUl;
  int device_id = 0;
  Bearer bearer = Bearer::kUrllc;
  int prb_start = 0;
  int prb_count = 0;
  int mcs = 0;
  int64_t tb_bits = 0;
  bool new_data = true;
  bool decoded = false;
  double sinr_db = 0.0;
};

struct RunDiagnostics {
  uint64_t events = 0;
  uint64_t ttis = 0;
  uint64_t priority_violations = 0;
  uint64_t prb_violations = 0;
  uint64_t invariant_checks = 0;
  std::vector<std::string> invariant_failures;  // first few only
  rlc::RlcCounters ai_dl;  // summed over AI devices
  rlc::RlcCounters ai_ul;
  uint64_t ai_dl_out_of_order = 0;
  uint64_t ai_ul_out_of_order = 0;
  uint64_t ai_duplicate_deliveries = 0;
  uint64_t fl_resent = 0;
  uint64_t fl_discarded_uploads = 0;
  uint64_t harq_drops_urllc = 0;
  uint64_t harq_drops_ai = 0;
  uint64_t tb_urllc = 0;
  uint64_t tb_urllc_failed = 0;
  uint64_t tb_ai = 0;
  uint64_t tb_ai_failed = 0;
  double ai_prb_share_dl = 0.0;  // fraction of DL PRB-TTIs carrying AI
  double ai_prb_share_ul = 0.0;
};

struct RunResult {
  std::string run_id;
  uint64_t seed = 0;
  int n_devices = 0;  // N
  double eta = 1.0;
  int n_required = 0;  // n
  int64_t model_bytes = 0;
  std::string config_hash;
  std::vector<UrllcDeviceResult> urllc;
  std::vector<fl::RoundRecord> rounds;
  std::vector<metrics::StateTrace> x_traces;  // UL then DL per URLLC device
  std::vector<AllocationTraceRow> allocation_trace;  // when sim.trace
  RunDiagnostics diag;

  std::vector<double> combined_availability() const;
  std::vector<double> round_delays() const;
};

/// One full simulation for (cfg, seed). Deterministic.
RunResult run_scenario(const ScenarioConfig& cfg, uint64_t seed, const std::string& run_id = {});

}  // namespace coexist
