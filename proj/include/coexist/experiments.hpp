// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexist/config.hpp"
#include "coexist/metrics.hpp"
#include "coexist/scenario.hpp"

namespace coexist::experiments {

/// One simulation to execute.
struct RunSpec {
  std::string run_id;
  ScenarioConfig cfg;
  uint64_t seed = 0;
};

/// Copy of `base` with N AI devices and n = ceil(eta * N) required uploads.
ScenarioConfig with_fl_point(const ScenarioConfig& base, int n_devices, double eta);

/// Seeds used by a sweep: base.sim.seed + s for s in [0, seeds).
std::vector<uint64_t> sweep_seeds(const ScenarioConfig& base, int seeds);

/// Eval1: fixed N, one run per (eta, seed). Throws std::invalid_argument for
/// eta outside (0, 1].
std::vector<RunSpec> plan_eval1(const ScenarioConfig& base, int n_devices, std::span<const double> etas, int seeds);

/// Eval2: fixed n, one run per (N, seed) with eta = n / N. Throws
/// std::invalid_argument when some N < n.
std::vector<RunSpec> plan_eval2(const ScenarioConfig& base, int n_required, std::span<const int> n_list, int seeds);

/// Executes the specs on up to `threads` workers (0: hardware concurrency).
/// Output order follows `specs` regardless of scheduling.
std::vector<RunResult> execute(const std::vector<RunSpec>& specs, unsigned threads = 0);

std::vector<RunResult> sweep_eval1(const ScenarioConfig& base, int n_devices, std::span<const double> etas, int seeds,
                                   unsigned threads = 0);
std::vector<RunResult> sweep_eval2(const ScenarioConfig& base, int n_required, std::span<const int> n_list, int seeds,
                                   unsigned threads = 0);

// ---------------------------------------------------------------------------
// Tabular records. Summaries are computed from these rows so that a report
// rebuilt from CSV matches the one printed after a sweep.

struct UrllcRow {
  std::string run_id;
  uint64_t seed = 0;
  int n_devices = 0;
  double eta = 1.0;
  int n_required = 0;
  int64_t model_bytes = 0;
  int device_id = 0;
  double avail_ul = 1.0;
  double avail_dl = 1.0;
  double avail_combined = 1.0;
};

struct AiRow {
  std::string run_id;
  uint64_t seed = 0;
  int n_devices = 0;
  double eta = 1.0;
  int n_required = 0;
  int64_t model_bytes = 0;
  int64_t round_k = 0;
  double d_k_ai_s = 0.0;
  int n_received_at_update = 0;
  double dist_to_wstar = 0.0;
};

std::vector<UrllcRow> urllc_rows(const std::vector<RunResult>& results);
std::vector<AiRow> ai_rows(const std::vector<RunResult>& results);

struct PointSummary {
  int n_devices = 0;
  double eta = 1.0;
  int n_required = 0;
  int64_t model_bytes = 0;
  int runs = 0;
  size_t avail_samples = 0;
  double avail_median = 1.0;
  double avail_p01 = 1.0;
  metrics::RequirementResult requirement;
  size_t rounds = 0;
  metrics::BoxStats delay;  // zeros when no round completed
};

/// Groups rows by (N, eta, n, model size) in ascending order.
std::vector<PointSummary> summarize(const std::vector<UrllcRow>& urllc, const std::vector<AiRow>& ai,
                                    double a_req = 0.95, double gamma = 0.01);
std::string format_summary(const std::vector<PointSummary>& points);

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes kpi_urllc.csv, kpi_ai.csv, ai_round_detail.csv, run_manifest.csv,
/// config_echo.cfg (the base config), one config_<hash>.cfg per distinct run
/// config, and allocation_trace.csv when tracing is on. Files are staged and
/// renamed into place; on failure nothing new is left behind.
void emit_csv(const std::vector<RunResult>& results, const std::vector<RunSpec>& specs, const ScenarioConfig& base,
              const std::filesystem::path& out_dir);

/// Reads kpi_urllc.csv and kpi_ai.csv from `in_dir` and summarises them.
std::vector<PointSummary> report(const std::filesystem::path& in_dir, double a_req = 0.95, double gamma = 0.01);

/// Shortest round-trip decimal form used in every CSV.
std::string format_double(double v);

}  // namespace coexist::experiments
