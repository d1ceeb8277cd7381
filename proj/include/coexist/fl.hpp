// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexist/engine.hpp"
#include "coexist/rng.hpp"
#include "coexist/time.hpp"

namespace coexist::fl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class LearnerMode : uint8_t { kGradient, kFedAvg };

struct FlConfig {
  int n_devices = 10;  // N
  int n_required = 10; // n, 1 <= n <= N
  double params = 0.5e6;
  int bytes_per_param = 4;
  LearnerMode mode = LearnerMode::kGradient;
  double step_size = 0.5;
  int local_steps = 1;
  double compute_c0_s = 0.05;
  double compute_c1_s = 100e-9;  // per parameter
  double master_compute_s = 0.02;
  int dim = 10;

  int64_t model_bytes() const;
  double eta() const { return static_cast<double>(n_required) / n_devices; }
  SimTime local_compute() const;
  void validate() const;
};

/// f_i(w) = 0.5 * ||A_i w - b_i||^2 per device.
struct LearnerProblem {
  std::vector<Mat> a;
  std::vector<Vec> b;

  int devices() const { return static_cast<int>(a.size()); }
  int dim() const { return a.empty() ? 0 : static_cast<int>(a.front().cols()); }
  double loss(int i, const Vec& w) const;
  Vec gradient(int i, const Vec& w) const;
  /// Closed-form minimiser of (1/N) sum f_i.
  Vec minimizer() const;
};

/// Heterogeneous well-conditioned quadratics drawn from `rng`.
LearnerProblem make_problem(int devices, int dim, RngStream& rng);

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient mode returns grad f_i(w); FedAvg runs `local_steps` gradient
/// steps from w and returns the local model.
Vec local_update(const LearnerProblem& prob, int i, const Vec& w, LearnerMode mode, double step_size,
                 int local_steps);

/// Gradient mode: w - (alpha/n) sum c_i. FedAvg: (1/n) sum c_i.
Vec global_update(const Vec& w, std::span<const Vec> uploads, LearnerMode mode, double step_size);

/// n-th smallest completion time plus the master compute delay. This is the
/// min over size-n subsets of the per-subset max, since the master delay is
/// common to all devices. Throws std::invalid_argument when fewer than n
/// completions are given.
double iteration_delay(std::span<const double> completion_s, int n, double master_compute_s);

struct Convergence {
  bool converged = false;
  double distance = 0.0;
};

Convergence convergence_check(const Vec& w, const LearnerProblem& prob, double tol);
Convergence convergence_check(const Vec& w, const Vec& w_star, double tol);

// ---------------------------------------------------------------------------
// Protocol state machine

struct DeviceRound {
  std::optional<SimTime> dl_done;
  std::optional<SimTime> compute_done;
  std::optional<SimTime> ul_done;
  bool in_first_n = false;
};

struct RoundState {
  int64_t k = 0;
  SimTime start;  // broadcast start, common to every device
  std::vector<DeviceRound> devices;
  std::vector<int> received;  // upload arrival order
  std::vector<Vec> uploads;   // c_i by device, valid for received devices
  bool first_n_fixed = false;
  std::optional<SimTime> update_time;

  /// c_i = d_D + d_pr + d_U for every device whose upload completed.
  std::vector<double> completion_seconds() const;
};

struct RoundRecord {
  int64_t k = 0;
  double d_k_ai_s = 0.0;
  double d_k_from_timestamps_s = 0.0;
  int n_received_at_update = 0;
  double dist_to_wstar = 0.0;
  struct Detail {
    int device_id = 0;
    double d_dl_s = -1.0;
    double d_compute_s = -1.0;
    double d_ul_s = -1.0;
    bool in_first_n = false;
  };
  std::vector<Detail> detail;
};

/// Network side of the protocol: unicast model SDUs, uploads, and
/// cancellation of stale transfers.
struct FlTransport {
  virtual ~FlTransport() = default;
  virtual void send_model(int device, int64_t bytes, uint64_t tag) = 0;
  virtual void send_upload(int device, int64_t bytes, uint64_t tag) = 0;
  virtual void cancel(int device) = 0;
};

/// Master plus N passive device agents. Rounds chain back to back: the
/// global update of round k starts round k+1.
class FlOrchestrator {
 public:
  FlOrchestrator(FlConfig cfg, LearnerProblem problem, Engine& engine, FlTransport& transport);

  void start(SimTime t);
  void start_round(int64_t k);

  void on_model_delivered(int device, uint64_t tag, SimTime t);
  void on_upload_delivered(int device, uint64_t tag, SimTime t);
  /// RLC gave up on an SDU; the application re-sends it.
  void on_model_failed(int device, uint64_t tag);
  void on_upload_failed(int device, uint64_t tag);

  const FlConfig& config() const { return cfg_; }
  const LearnerProblem& problem() const { return problem_; }
  const Vec& model() const { return w_; }
  const Vec& w_star() const { return w_star_; }
  const RoundState& current_round() const { return round_; }
  const std::vector<RoundRecord>& records() const { return records_; }
  uint64_t discarded_uploads() const { return discarded_uploads_; }
  uint64_t resent_sdus() const { return resent_; }

  static uint64_t make_tag(int64_t k) { return static_cast<uint64_t>(k); }

 private:
  void finish_round();

  FlConfig cfg_;
  LearnerProblem problem_;
  Engine& engine_;
  FlTransport& transport_;
  Vec w_;
  Vec w_star_;
  RoundState round_;
  std::vector<RoundRecord> records_;
  uint64_t discarded_uploads_ = 0;
  uint64_t resent_ = 0;
};

}  // namespace coexist::fl
