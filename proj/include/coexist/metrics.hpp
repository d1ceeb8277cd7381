// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coexist/time.hpp"
#include "coexist/types.hpp"

namespace coexist::metrics {

struct Transition {
  SimTime time;
  uint8_t value = 1;

  bool operator==(const Transition&) const = default;
};

/// Piecewise-constant 0/1 signal on [0, horizon). The value before the first
/// transition is 1 (no failures before the run starts).
struct StateTrace {
  int device_id = 0;
  Direction direction = Direction::kUl;
  std::vector<Transition> transitions;  // strictly increasing, alternating, first is to 0
  SimTime horizon;

  /// Value at time t.
  uint8_t at(SimTime t) const;
  bool valid() const;
};

/// Records a signal through arbitrary set() calls in non-decreasing time
/// order, collapsing no-op and same-instant transitions.
class TraceBuilder {
 public:
  explicit TraceBuilder(int device_id = 0, Direction dir = Direction::kUl) {
    trace_.device_id = device_id;
    trace_.direction = dir;
  }
  void set(SimTime t, uint8_t value);
  uint8_t current() const { return trace_.transitions.empty() ? 1 : trace_.transitions.back().value; }
  StateTrace finish(SimTime horizon) const;

 private:
  StateTrace trace_;
};

/// Y(t) = 0 iff X was 0 throughout [t - T_sv, t]. A zero run [u, v) of X maps
/// to Y = 0 on [u + T_sv, v) when v - u > T_sv. T_sv = 0 returns X.
StateTrace apply_survival(const StateTrace& x, SimTime survival_time);

/// Pointwise AND of two traces over the shorter horizon.
StateTrace combine_and(const StateTrace& a, const StateTrace& b);

/// (1/T) * integral of Y over [0, T), exact on the piecewise representation.
double availability(const StateTrace& y, SimTime horizon);

struct AvailabilitySample {
  int device_id = 0;
  double a_bar = 1.0;
  uint64_t seed = 0;
  int n_devices = 0;
  double eta = 1.0;
  int64_t model_bytes = 0;
};

struct RequirementResult {
  bool pass = false;
  double violation_probability = 0.0;
};

/// Empirical Pr{a <= a_req}; pass iff it does not exceed gamma.
RequirementResult requirement_check(std::span<const double> samples, double a_req, double gamma);

/// Nearest-rank percentile: sorted value at 1-based index ceil(p * count).
double percentile(std::span<const double> samples, double p);

struct BoxStats {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

BoxStats box_stats(std::span<const double> samples);

}  // namespace coexist::metrics
