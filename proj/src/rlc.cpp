// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/rlc.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace coexist::rlc {

RlcEntity::RlcEntity(Bearer bearer, RlcConfig cfg) : bearer_(bearer), cfg_(cfg) {
  if (cfg_.header_bytes < 0) throw std::invalid_argument("rlc: negative header size");
  if (cfg_.am_max_tx < 1) throw std::invalid_argument("rlc: am_max_tx must be >= 1");
}

std::optional<uint64_t> RlcEntity::enqueue_sdu(int64_t size_bytes, SimTime now, uint64_t tag) {
  if (size_bytes < 1) throw std::invalid_argument("rlc: SDU size must be >= 1 byte");
  const uint64_t id = next_id_++;
  sdus_.push_back(RlcSdu{id, bearer_, size_bytes, now, tag});
  status_.push_back(Status::kOpen);
  ++open_;
  ++counters_.enqueued;
  if (cfg_.buffer_cap_bytes > 0 && queued_bytes_ + size_bytes > cfg_.buffer_cap_bytes) {
    resolve(id, Status::kDiscarded);
    ++counters_.discarded;
    return std::nullopt;
  }
  tx_queue_.push_back(TxSdu{sdus_.back(), 0});
  queued_bytes_ += size_bytes;
  return id;
}

int64_t RlcEntity::queued_bytes_with_headers() const {
  return queued_bytes_ + cfg_.header_bytes * static_cast<int64_t>(tx_queue_.size() + retx_queue_.size());
}

std::optional<RlcPdu> RlcEntity::next_pdu(int64_t max_bytes) {
  const int64_t budget = max_bytes - cfg_.header_bytes;
  if (budget < 1) return std::nullopt;

  while (!retx_queue_.empty()) {
    RlcPdu& head = retx_queue_.front();
    if (!is_open(head.sdu_id)) {
      queued_bytes_ -= head.length;
      retx_queue_.pop_front();
      continue;
    }
    RlcPdu out = head;
    if (head.length <= budget) {
      retx_queue_.pop_front();
    } else {
      // Re-segment: the remainder keeps its attempt count.
      out.length = budget;
      out.is_last_segment = false;
      head.offset += budget;
      head.length -= budget;
    }
    queued_bytes_ -= out.length;
    ++in_flight_[out.sdu_id];
    return out;
  }

  while (!tx_queue_.empty()) {
    TxSdu& head = tx_queue_.front();
    if (!is_open(head.sdu.sdu_id)) {
      queued_bytes_ -= head.sdu.size_bytes - head.sent;
      tx_queue_.pop_front();
      continue;
    }
    RlcPdu out;
    out.sdu_id = head.sdu.sdu_id;
    out.offset = head.sent;
    out.length = std::min(budget, head.sdu.size_bytes - head.sent);
    out.is_last_segment = head.sent + out.length == head.sdu.size_bytes;
    head.sent += out.length;
    queued_bytes_ -= out.length;
    if (out.is_last_segment) tx_queue_.pop_front();
    ++in_flight_[out.sdu_id];
    return out;
  }
  return std::nullopt;
}

PduOutcome RlcEntity::on_pdu_outcome(const RlcPdu& pdu, bool delivered, SimTime now) {
  auto it = in_flight_.find(pdu.sdu_id);
  if (it == in_flight_.end()) return PduOutcome::kNone;  // flushed meanwhile
  if (--it->second == 0) in_flight_.erase(it);
  if (delivered || !is_open(pdu.sdu_id)) return PduOutcome::kNone;

  if (cfg_.mode == Mode::kUm) {
    // The gap can never be filled.
    fail_sdu(pdu.sdu_id, now);
    return PduOutcome::kNone;
  }
  if (pdu.attempt >= cfg_.am_max_tx) {
    fail_sdu(pdu.sdu_id, now);
    return PduOutcome::kSduFailed;
  }
  RlcPdu again = pdu;
  ++again.attempt;
  retx_queue_.push_back(again);
  queued_bytes_ += again.length;
  return PduOutcome::kRetxQueued;
}

std::vector<RlcSdu> RlcEntity::reassemble(const RlcPdu& pdu, SimTime now) {
  std::vector<RlcSdu> out;
  if (!is_open(pdu.sdu_id) || rx_complete_.count(pdu.sdu_id)) return out;
  RxSdu& rx = rx_partial_[pdu.sdu_id];
  if (!rx.segments.emplace(pdu.offset, pdu.length).second) return out;  // duplicate
  rx.received += pdu.length;
  if (pdu.is_last_segment) rx.total = pdu.offset + pdu.length;
  if (rx.total < 0 || rx.received < rx.total) return out;

  rx_partial_.erase(pdu.sdu_id);
  if (cfg_.mode == Mode::kUm) {
    resolve(pdu.sdu_id, Status::kDelivered);
    ++counters_.delivered;
    out.push_back(sdus_[pdu.sdu_id]);
    if (deliver_fn_) deliver_fn_(out.back(), now);
    return out;
  }
  rx_complete_.emplace(pdu.sdu_id, true);
  release_in_order(now, &out);
  return out;
}

void RlcEntity::discard_partial(uint64_t sdu_id) { rx_partial_.erase(sdu_id); }

void RlcEntity::flush() {
  for (uint64_t id = 0; id < next_id_; ++id) {
    if (status_[id] == Status::kOpen) {
      resolve(id, Status::kDiscarded);
      ++counters_.discarded;
    }
  }
  tx_queue_.clear();
  retx_queue_.clear();
  in_flight_.clear();
  rx_partial_.clear();
  rx_complete_.clear();
  queued_bytes_ = 0;
  next_release_ = next_id_;
}

void RlcEntity::resolve(uint64_t id, Status st) {
  status_[id] = st;
  --open_;
}

void RlcEntity::fail_sdu(uint64_t id, SimTime now) {
  resolve(id, Status::kFailed);
  ++counters_.failed;
  for (auto it = tx_queue_.begin(); it != tx_queue_.end(); ++it) {
    if (it->sdu.sdu_id == id) {
      queued_bytes_ -= it->sdu.size_bytes - it->sent;
      tx_queue_.erase(it);
      break;
    }
  }
  for (auto it = retx_queue_.begin(); it != retx_queue_.end();) {
    if (it->sdu_id == id) {
      queued_bytes_ -= it->length;
      it = retx_queue_.erase(it);
    } else {
      ++it;
    }
  }
  rx_partial_.erase(id);
  rx_complete_.erase(id);
  if (fail_fn_) fail_fn_(sdus_[id], now);
  if (cfg_.mode == Mode::kAm) release_in_order(now, nullptr);
}

void RlcEntity::release_in_order(SimTime now, std::vector<RlcSdu>* out) {
  while (next_release_ < next_id_) {
    const uint64_t id = next_release_;
    if (status_[id] == Status::kOpen) {
      auto it = rx_complete_.find(id);
      if (it == rx_complete_.end()) break;
      rx_complete_.erase(it);
      resolve(id, Status::kDelivered);
      ++counters_.delivered;
      if (out) out->push_back(sdus_[id]);
      if (deliver_fn_) deliver_fn_(sdus_[id], now);
    }
    ++next_release_;
  }
}

std::string RlcEntity::check_invariants() const {
  std::ostringstream err;
  uint64_t open = 0;
  for (Status s : status_) open += s == Status::kOpen;
  if (open != open_) err << "open counter " << open_ << " != scanned " << open << "; ";
  const RlcCounters& c = counters_;
  if (c.enqueued != c.delivered + c.failed + c.discarded + open_) {
    err << "conservation: enqueued " << c.enqueued << " != delivered " << c.delivered << " + failed "
        << c.failed << " + discarded " << c.discarded << " + open " << open_ << "; ";
  }

  std::set<uint64_t> tracked;
  int64_t bytes = 0;
  for (const TxSdu& t : tx_queue_) {
    tracked.insert(t.sdu.sdu_id);
    if (is_open(t.sdu.sdu_id)) bytes += t.sdu.size_bytes - t.sent;
  }
  for (const RlcPdu& p : retx_queue_) {
    tracked.insert(p.sdu_id);
    if (is_open(p.sdu_id)) bytes += p.length;
    if (p.attempt > cfg_.am_max_tx) err << "retx attempt " << p.attempt << " exceeds cap; ";
  }
  for (const auto& [id, n] : in_flight_) tracked.insert(id);
  for (const auto& [id, rx] : rx_partial_) tracked.insert(id);
  for (const auto& [id, done] : rx_complete_) tracked.insert(id);
  for (uint64_t id = 0; id < next_id_; ++id) {
    if (status_[id] == Status::kOpen && !tracked.count(id)) err << "open SDU " << id << " is untracked; ";
  }
  // Stale entries of resolved SDUs are lazily dropped, so only open bytes count.
  int64_t stale = 0;
  for (const TxSdu& t : tx_queue_) {
    if (!is_open(t.sdu.sdu_id)) stale += t.sdu.size_bytes - t.sent;
  }
  for (const RlcPdu& p : retx_queue_) {
    if (!is_open(p.sdu_id)) stale += p.length;
  }
  if (bytes + stale != queued_bytes_) err << "queued bytes mismatch; ";
  return err.str();
}

}  // namespace coexist::rlc
