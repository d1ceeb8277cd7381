// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coexist::metrics {

uint8_t StateTrace::at(SimTime t) const {
  uint8_t v = 1;
  for (const Transition& tr : transitions) {
    if (tr.time > t) break;
    v = tr.value;
  }
  return v;
}

bool StateTrace::valid() const {
  uint8_t prev = 1;
  for (size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].value > 1 || transitions[i].value == prev) return false;
    if (i > 0 && transitions[i].time <= transitions[i - 1].time) return false;
    if (transitions[i].time < SimTime{}) return false;
    prev = transitions[i].value;
  }
  return true;
}

void TraceBuilder::set(SimTime t, uint8_t value) {
  auto& tr = trace_.transitions;
  if (!tr.empty() && t < tr.back().time) throw std::logic_error("trace: out-of-order transition");
  if (!tr.empty() && tr.back().time == t) {
    // Last write at an instant wins.
    tr.pop_back();
  }
  const uint8_t cur = tr.empty() ? 1 : tr.back().value;
  if (cur != value) tr.push_back({t, value});
}

StateTrace TraceBuilder::finish(SimTime horizon) const {
  StateTrace out = trace_;
  out.horizon = horizon;
  return out;
}

namespace {

// Zero runs [u, v) of a trace, v clipped to the horizon.
std::vector<std::pair<SimTime, SimTime>> zero_runs(const StateTrace& x) {
  std::vector<std::pair<SimTime, SimTime>> runs;
  const auto& tr = x.transitions;
  for (size_t i = 0; i < tr.size(); ++i) {
    if (tr[i].value != 0) continue;
    const SimTime end = i + 1 < tr.size() ? tr[i + 1].time : std::max(x.horizon, tr[i].time);
    runs.emplace_back(tr[i].time, end);
  }
  return runs;
}

StateTrace from_runs(const StateTrace& like, const std::vector<std::pair<SimTime, SimTime>>& runs) {
  StateTrace out;
  out.device_id = like.device_id;
  out.direction = like.direction;
  out.horizon = like.horizon;
  for (const auto& [u, v] : runs) {
    if (v <= u) continue;
    if (!out.transitions.empty() && out.transitions.back().time == u) {
      out.transitions.pop_back();  // adjacent runs merge
    } else {
      out.transitions.push_back({u, 0});
    }
    out.transitions.push_back({v, 1});
  }
  // A run reaching the horizon needs no closing transition.
  if (!out.transitions.empty() && out.transitions.back().value == 1 &&
      out.transitions.back().time >= out.horizon) {
    out.transitions.pop_back();
  }
  return out;
}

}  // namespace

StateTrace apply_survival(const StateTrace& x, SimTime survival_time) {
  if (survival_time <= SimTime{}) return x;
  std::vector<std::pair<SimTime, SimTime>> runs;
  for (const auto& [u, v] : zero_runs(x)) {
    const bool open_ended = x.transitions.back().time == u && x.transitions.back().value == 0;
    const SimTime start = u + survival_time;
    if (open_ended) {
      if (start < x.horizon) runs.emplace_back(start, x.horizon);
    } else if (v - u > survival_time) {
      runs.emplace_back(start, v);
    }
  }
  return from_runs(x, runs);
}

StateTrace combine_and(const StateTrace& a, const StateTrace& b) {
  StateTrace out;
  out.device_id = a.device_id;
  out.direction = a.direction;
  out.horizon = std::min(a.horizon, b.horizon);
  TraceBuilder builder(a.device_id, a.direction);
  size_t i = 0, j = 0;
  uint8_t va = 1, vb = 1;
  while (i < a.transitions.size() || j < b.transitions.size()) {
    SimTime t = SimTime::max();
    if (i < a.transitions.size()) t = std::min(t, a.transitions[i].time);
    if (j < b.transitions.size()) t = std::min(t, b.transitions[j].time);
    while (i < a.transitions.size() && a.transitions[i].time == t) va = a.transitions[i++].value;
    while (j < b.transitions.size() && b.transitions[j].time == t) vb = b.transitions[j++].value;
    builder.set(t, va & vb);
  }
  out.transitions = builder.finish(out.horizon).transitions;
  return out;
}

double availability(const StateTrace& y, SimTime horizon) {
  if (horizon <= SimTime{}) throw std::invalid_argument("availability: horizon must be positive");
  int64_t down = 0;
  const auto& tr = y.transitions;
  for (size_t i = 0; i < tr.size(); ++i) {
    if (tr[i].value != 0) continue;
    const SimTime start = std::max(tr[i].time, SimTime{});
    const SimTime end = std::min(i + 1 < tr.size() ? tr[i + 1].time : horizon, horizon);
    if (end > start) down += (end - start).ns();
  }
  return static_cast<double>(horizon.ns() - down) / static_cast<double>(horizon.ns());
}

RequirementResult requirement_check(std::span<const double> samples, double a_req, double gamma) {
  if (samples.empty()) throw std::invalid_argument("requirement_check: empty sample set");
  const auto bad = std::count_if(samples.begin(), samples.end(), [&](double a) { return a <= a_req; });
  RequirementResult r;
  r.violation_probability = static_cast<double>(bad) / static_cast<double>(samples.size());
  r.pass = r.violation_probability <= gamma;
  return r;
}

double percentile(std::span<const double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile: empty sample set");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<int64_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<int64_t>(rank, 1, static_cast<int64_t>(sorted.size()));
  return sorted[rank - 1];
}

BoxStats box_stats(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("box_stats: empty sample set");
  BoxStats b;
  b.min = *std::min_element(samples.begin(), samples.end());
  b.max = *std::max_element(samples.begin(), samples.end());
  b.q25 = percentile(samples, 0.25);
  b.median = percentile(samples, 0.50);
  b.q75 = percentile(samples, 0.75);
  return b;
}

}  // namespace coexist::metrics
