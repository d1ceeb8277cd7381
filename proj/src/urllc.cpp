// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/urllc.hpp"

#include <stdexcept>

namespace coexist::urllc {

void UrllcFlowCfg::validate() const {
  if (period <= SimTime{}) throw std::invalid_argument("urllc: period must be positive");
  if (size_bytes < 1) throw std::invalid_argument("urllc: size must be >= 1 byte");
  if (delay_bound <= SimTime{}) throw std::invalid_argument("urllc: delay bound must be positive");
  if (survival_time < SimTime{}) throw std::invalid_argument("urllc: survival time must be >= 0");
  if (phase < SimTime{}) throw std::invalid_argument("urllc: phase must be >= 0");
}

UrllcFlowCfg default_ul_flow() {
  return UrllcFlowCfg{Direction::kUl, SimTime::from_ms(5), 64, SimTime::from_ms(6), SimTime::from_ms(5), {}};
}

UrllcFlowCfg default_dl_flow() {
  return UrllcFlowCfg{Direction::kDl, SimTime::from_ms(5), 80, SimTime::from_ms(2), SimTime::from_ms(5), {}};
}

std::vector<SimTime> generate(const UrllcFlowCfg& flow, SimTime horizon) {
  flow.validate();
  std::vector<SimTime> out;
  for (SimTime t = flow.phase; t < horizon; t += flow.period) out.push_back(t);
  return out;
}

metrics::Transition outcome_transition(const PacketRecord& pkt) {
  if (pkt.on_time()) return {*pkt.delivery_time, 1};
  return {pkt.deadline, 0};
}

FlowMonitor::FlowMonitor(int device_id, const UrllcFlowCfg& flow)
    : device_id_(device_id), flow_(flow), builder_(device_id, flow.direction) {
  flow_.validate();
}

uint64_t FlowMonitor::on_generated(SimTime gen_time) {
  packets_.push_back(PacketRecord{device_id_, flow_.direction, gen_time, gen_time + flow_.delay_bound, {}});
  deadline_seen_.push_back(0);
  ++counters_.generated;
  return packets_.size() - 1;
}

void FlowMonitor::on_delivered(uint64_t index, SimTime t) {
  PacketRecord& p = packets_.at(index);
  if (p.delivery_time) return;
  p.delivery_time = t;
  if (t > p.deadline) {
    ++counters_.late;
    return;
  }
  if (deadline_seen_[index]) {
    // Deadline handler ran first at the same instant; undo its failure.
    --counters_.failed;
  }
  ++counters_.on_time;
  builder_.set(t, 1);
}

void FlowMonitor::on_deadline(uint64_t index) {
  PacketRecord& p = packets_.at(index);
  deadline_seen_[index] = 1;
  if (p.on_time()) return;
  ++counters_.failed;
  builder_.set(p.deadline, 0);
}

uint64_t FlowMonitor::due_by(SimTime horizon) const {
  uint64_t n = 0;
  for (const PacketRecord& p : packets_) n += p.deadline <= horizon;
  return n;
}

}  // namespace coexist::urllc
