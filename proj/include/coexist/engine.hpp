// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "coexist/time.hpp"

namespace coexist {

enum class EventKind : uint8_t {
  kPacketArrival,
  kTtiBoundary,
  kHarqFeedback,
  kComputeDone,
  kRoundTrigger,
  kMetricSample,
};

std::string_view to_string(EventKind kind);

class Engine;

struct Event {
  SimTime time;
  uint64_t seq = 0;  // assigned by Engine::schedule
  EventKind kind = EventKind::kMetricSample;
  std::function<void(Engine&)> action;
};

/// Thrown when an event is scheduled before the current clock.
class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Single-threaded discrete-event core. Events dispatch in (time, seq) order;
/// seq is the insertion counter, so simultaneous events run FIFO.
class Engine {
 public:
  struct TraceEntry {
    SimTime time;
    uint64_t seq;
    EventKind kind;
  };

  SimTime now() const { return now_; }

  /// Returns the assigned sequence number.
  uint64_t schedule(Event event);
  uint64_t schedule(SimTime time, EventKind kind, std::function<void(Engine&)> action);

  /// Dispatches every event with time <= t_end (including ones scheduled by
  /// handlers along the way) and leaves the clock at t_end.
  uint64_t run_until(SimTime t_end);

  size_t pending() const { return queue_.size(); }
  uint64_t dispatched() const { return dispatched_; }

  /// Records (time, seq, kind) of every dispatched event when enabled.
  void enable_trace(bool on) { trace_on_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

  /// Called after each dispatched event; used for invariant scans.
  void set_post_dispatch_hook(std::function<void(const Engine&)> hook) {
    post_hook_ = std::move(hook);
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  SimTime now_;
  uint64_t next_seq_ = 0;
  uint64_t dispatched_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  bool trace_on_ = false;
  std::vector<TraceEntry> trace_;
  std::function<void(const Engine&)> post_hook_;
};

}  // namespace coexist
