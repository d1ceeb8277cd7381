// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace coexist {

/// Simulation time in integer nanoseconds since start of run.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(int64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_us(int64_t us) { return SimTime(us * 1000); }
  static constexpr SimTime from_ms(int64_t ms) { return SimTime(ms * 1000000); }
  /// Rounds to the nearest nanosecond.
  static SimTime from_seconds(double s);
  static constexpr SimTime max() { return SimTime(std::numeric_limits<int64_t>::max()); }

  constexpr int64_t ns() const { return ticks_; }
  constexpr double seconds() const { return static_cast<double>(ticks_) * 1e-9; }
  constexpr double ms() const { return static_cast<double>(ticks_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(ticks_ + o.ticks_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(ticks_ - o.ticks_); }
  constexpr SimTime& operator+=(SimTime o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr SimTime operator*(int64_t k) const { return SimTime(ticks_ * k); }

 private:
  constexpr explicit SimTime(int64_t ns) : ticks_(ns) {}
  int64_t ticks_ = 0;
};

/// One transmission time interval (0.5 ms slot, 30 kHz numerology).
inline constexpr SimTime kDefaultTti = SimTime::from_us(500);

}  // namespace coexist
