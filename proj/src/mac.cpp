// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/mac.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace coexist::mac {
namespace {

// Round-robin order: device ids after `last` first, then wrap.
template <typename T, typename IdFn>
std::vector<T> rotate_after(std::vector<T> items, int last, IdFn id_of) {
  std::stable_sort(items.begin(), items.end(), [&](const T& a, const T& b) { return id_of(a) < id_of(b); });
  auto pivot = std::find_if(items.begin(), items.end(), [&](const T& x) { return id_of(x) > last; });
  std::rotate(items.begin(), pivot, items.end());
  return items;
}

}  // namespace

HarqResult harq_verdict(const HarqProcess& p, bool ack) {
  if (ack) return HarqResult::kDelivered;
  return p.tx_count < p.max_tx ? HarqResult::kRetransmit : HarqResult::kDropped;
}

int TtiAllocation::used_prbs() const {
  int n = 0;
  for (const Grant& g : grants) n += g.prbs.count;
  return n;
}

CellScheduler::CellScheduler(int cell, Direction dir, MacParams params)
    : cell_(cell), dir_(dir), params_(params) {
  if (params_.prbs < 1) throw std::invalid_argument("mac: prbs must be >= 1");
  if (params_.max_tx_urllc < 1 || params_.max_tx_ai < 1) throw std::invalid_argument("mac: max_tx must be >= 1");
}

const HarqProcess* CellScheduler::find(uint64_t id) const {
  auto it = processes_.find(id);
  return it == processes_.end() ? nullptr : &it->second;
}

std::vector<const HarqProcess*> CellScheduler::pending_retx(int64_t tti) const {
  std::vector<const HarqProcess*> out;
  for (const auto& [id, p] : processes_) {
    if (p.ready_tti >= 0 && p.ready_tti <= tti) out.push_back(&p);
  }
  return out;
}

TtiAllocation CellScheduler::schedule_tti(int64_t tti, std::span<const SchedRequest> requests) {
  TtiAllocation alloc;
  alloc.tti = tti;
  alloc.cell = cell_;
  alloc.direction = dir_;
  int next_prb = 0;
  auto free_prbs = [&] { return params_.prbs - next_prb; };

  // (1) HARQ retransmissions, URLLC class first.
  for (Bearer cls : {Bearer::kUrllc, Bearer::kAi}) {
    std::vector<HarqProcess*> ready;
    for (auto& [id, p] : processes_) {
      if (p.bearer == cls && p.ready_tti >= 0 && p.ready_tti <= tti) ready.push_back(&p);
    }
    if (ready.empty()) continue;
    ready = rotate_after(std::move(ready), last_retx_[index(cls)], [](const HarqProcess* p) { return p->device_id; });
    for (HarqProcess* p : ready) {
      if (p->prb_count > free_prbs()) continue;  // deferred to a later TTI
      Grant g;
      g.device_id = p->device_id;
      g.bearer = p->bearer;
      g.prbs = {next_prb, p->prb_count};
      g.mcs = p->mcs;
      g.tb_bits = p->tb_bits;
      g.new_data = false;
      g.harq_id = p->id;
      next_prb += p->prb_count;
      ++p->tx_count;
      p->ready_tti = -1;
      last_retx_[index(cls)] = p->device_id;
      alloc.grants.push_back(g);
    }
  }

  // (2) new URLLC data, (3) new AI data.
  std::set<int> has_new_tb;
  for (Bearer cls : {Bearer::kUrllc, Bearer::kAi}) {
    std::vector<const SchedRequest*> reqs;
    for (const SchedRequest& r : requests) {
      if (r.bearer == cls && r.queued_bytes > 0) reqs.push_back(&r);
    }
    reqs = rotate_after(std::move(reqs), last_new_[index(cls)], [](const SchedRequest* r) { return r->device_id; });
    const double target = cls == Bearer::kUrllc ? params_.bler_target_urllc : params_.bler_target_ai;
    for (const SchedRequest* r : reqs) {
      if (free_prbs() <= 0) break;
      if (!has_new_tb.insert(r->device_id).second) continue;
      const radio::McsEntry& mcs =
          radio::select_mcs(r->sinr_estimate_db, target, radio::default_mcs_table(), params_.bler_slope_db);
      const int n = radio::prbs_for_bits(r->queued_bytes * 8, mcs, free_prbs(), params_.overhead);
      HarqProcess p;
      p.id = next_harq_id_++;
      p.device_id = r->device_id;
      p.bearer = cls;
      p.mcs = mcs;
      p.prb_count = n;
      p.tb_bits = radio::tb_capacity(n, mcs, params_.overhead);
      p.tx_count = 1;
      p.max_tx = cls == Bearer::kUrllc ? params_.max_tx_urllc : params_.max_tx_ai;
      Grant g;
      g.device_id = r->device_id;
      g.bearer = cls;
      g.prbs = {next_prb, n};
      g.mcs = mcs;
      g.tb_bits = p.tb_bits;
      g.new_data = true;
      g.harq_id = p.id;
      next_prb += n;
      last_new_[index(cls)] = r->device_id;
      processes_.emplace(p.id, std::move(p));
      alloc.grants.push_back(g);
    }
  }
  return alloc;
}

HarqResult CellScheduler::on_harq_feedback(uint64_t id, bool ack, int64_t tti, HarqProcess* done) {
  auto it = processes_.find(id);
  if (it == processes_.end()) throw std::logic_error("mac: feedback for unknown HARQ process");
  HarqProcess& p = it->second;
  const HarqResult r = harq_verdict(p, ack);
  if (r == HarqResult::kRetransmit) {
    p.ready_tti = tti;
    return r;
  }
  if (done) *done = std::move(p);
  processes_.erase(it);
  return r;
}

void CellScheduler::flush(int device_id, Bearer bearer) {
  std::erase_if(processes_, [&](const auto& kv) {
    return kv.second.device_id == device_id && kv.second.bearer == bearer;
  });
}

std::string check_strict_priority(const TtiAllocation& alloc, std::span<const SchedRequest> requests,
                                  int total_prbs) {
  bool ai_new = false;
  int used_before_ai = 0;
  std::set<int> urllc_granted;
  for (const Grant& g : alloc.grants) {
    if (g.bearer == Bearer::kAi && g.new_data) {
      ai_new = true;
    } else {
      used_before_ai += g.prbs.count;
      if (g.bearer == Bearer::kUrllc && g.new_data) urllc_granted.insert(g.device_id);
    }
  }
  if (!ai_new || used_before_ai >= total_prbs) return {};
  for (const SchedRequest& r : requests) {
    if (r.bearer == Bearer::kUrllc && r.queued_bytes > 0 && !urllc_granted.count(r.device_id)) {
      std::ostringstream os;
      os << "tti " << alloc.tti << " cell " << alloc.cell << " " << to_string(alloc.direction)
         << ": AI new-data grant while URLLC device " << r.device_id << " unserved with "
         << total_prbs - used_before_ai << " PRBs free";
      return os.str();
    }
  }
  return {};
}

std::string check_prb_budget(const TtiAllocation& alloc, int total_prbs) {
  std::vector<radio::PrbRange> ranges;
  for (const Grant& g : alloc.grants) {
    if (g.prbs.count < 1 || g.prbs.start < 0 || g.prbs.end() > total_prbs) {
      return "grant outside PRB budget at tti " + std::to_string(alloc.tti);
    }
    for (const radio::PrbRange& r : ranges) {
      if (radio::overlap(r, g.prbs) > 0) return "overlapping grants at tti " + std::to_string(alloc.tti);
    }
    ranges.push_back(g.prbs);
  }
  if (alloc.used_prbs() > total_prbs) return "PRB budget exceeded at tti " + std::to_string(alloc.tti);
  return {};
}

}  // namespace coexist::mac
