// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/engine.hpp"

#include <cmath>
#include <string>

namespace coexist {

SimTime SimTime::from_seconds(double s) { return SimTime(static_cast<int64_t>(std::llround(s * 1e9))); }

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kPacketArrival: return "packet-arrival";
    case EventKind::kTtiBoundary: return "tti-boundary";
    case EventKind::kHarqFeedback: return "harq-feedback";
    case EventKind::kComputeDone: return "compute-done";
    case EventKind::kRoundTrigger: return "round-trigger";
    case EventKind::kMetricSample: return "metric-sample";
  }
  return "unknown";
}

uint64_t Engine::schedule(Event event) {
  if (event.time < now_) {
    throw SchedulingError("event scheduled in the past: t=" + std::to_string(event.time.ns()) +
                          " ns, clock=" + std::to_string(now_.ns()) + " ns");
  }
  event.seq = next_seq_++;
  const uint64_t seq = event.seq;
  queue_.push(std::move(event));
  return seq;
}

uint64_t Engine::schedule(SimTime time, EventKind kind, std::function<void(Engine&)> action) {
  return schedule(Event{time, 0, kind, std::move(action)});
}

uint64_t Engine::run_until(SimTime t_end) {
  if (t_end < now_) {
    throw SchedulingError("run_until target precedes the clock");
  }
  uint64_t count = 0;
  while (!queue_.empty() && queue_.top().time <= t_end) {
    // priority_queue::top is const; the event is moved out before pop.
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = ev.time;
    if (trace_on_) trace_.push_back({ev.time, ev.seq, ev.kind});
    if (ev.action) ev.action(*this);
    ++count;
    ++dispatched_;
    if (post_hook_) post_hook_(*this);
  }
  now_ = t_end;
  return count;
}

}  // namespace coexist
