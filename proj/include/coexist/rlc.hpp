// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coexist/time.hpp"
#include "coexist/types.hpp"

namespace coexist::rlc {

enum class Mode : uint8_t { kAm, kUm };

struct RlcSdu {
  uint64_t sdu_id = 0;  // assigned by the entity, dense from 0
  Bearer bearer = Bearer::kUrllc;
  int64_t size_bytes = 0;
  SimTime enqueue_time;
  uint64_t tag = 0;  // opaque owner data (packet index, FL round, ...)
};

struct RlcPdu {
  uint64_t sdu_id = 0;
  int64_t offset = 0;
  int64_t length = 0;
  bool is_last_segment = false;
  int attempt = 1;  // AM transmission attempt, 1-based
};

enum class PduOutcome : uint8_t { kNone, kRetxQueued, kSduFailed };

struct RlcConfig {
  Mode mode = Mode::kUm;
  int header_bytes = 5;
  int am_max_tx = 8;
  int64_t buffer_cap_bytes = 0;  // 0 = unlimited
};

struct RlcCounters {
  uint64_t enqueued = 0;
  uint64_t delivered = 0;
  uint64_t failed = 0;
  uint64_t discarded = 0;  // buffer overflow or flush
};

/// One RLC bearer in one direction: transmit buffer on the sending side and
/// reassembly on the receiving side. AM loss detection is driven directly by
/// MAC drop notifications; there is no status-PDU machinery.
class RlcEntity {
 public:
  using DeliverFn = std::function<void(const RlcSdu&, SimTime)>;
  using FailFn = std::function<void(const RlcSdu&, SimTime)>;

  RlcEntity(Bearer bearer, RlcConfig cfg);

  Mode mode() const { return cfg_.mode; }
  Bearer bearer() const { return bearer_; }
  const RlcConfig& config() const { return cfg_; }

  void on_deliver(DeliverFn fn) { deliver_fn_ = std::move(fn); }
  void on_fail(FailFn fn) { fail_fn_ = std::move(fn); }

  /// Appends an SDU; returns its id, or nullopt when the buffer cap would be
  /// exceeded (the SDU is discarded and counted).
  std::optional<uint64_t> enqueue_sdu(int64_t size_bytes, SimTime now, uint64_t tag = 0);

  /// Payload bytes waiting for transmission (new data plus AM retx).
  int64_t queued_bytes() const { return queued_bytes_; }
  /// Bytes a grant must carry to drain the buffer, one header per PDU.
  int64_t queued_bytes_with_headers() const;
  bool has_data() const { return queued_bytes_ > 0; }

  /// Next PDU whose total size (payload + header) fits max_bytes. AM serves
  /// the retransmission queue first. nullopt when empty or the budget cannot
  /// carry a single payload byte.
  std::optional<RlcPdu> next_pdu(int64_t max_bytes);

  /// MAC verdict on a transmitted PDU (ack, or drop after max HARQ tx).
  PduOutcome on_pdu_outcome(const RlcPdu& pdu, bool delivered, SimTime now);

  /// Receiver side; returns SDUs released to the upper layer by this PDU.
  std::vector<RlcSdu> reassemble(const RlcPdu& pdu, SimTime now);

  /// Drops an incomplete reassembly buffer (UM deadline).
  void discard_partial(uint64_t sdu_id);

  /// Removes every queued, in-flight and partially reassembled SDU.
  void flush();

  const RlcCounters& counters() const { return counters_; }
  uint64_t open_sdus() const { return open_; }

  /// Empty when the conservation identity and structural invariants hold.
  std::string check_invariants() const;

 private:
  enum class Status : uint8_t { kOpen, kDelivered, kFailed, kDiscarded };

  struct TxSdu {
    RlcSdu sdu;
    int64_t sent = 0;
  };
  struct RxSdu {
    std::map<int64_t, int64_t> segments;  // offset -> length
    int64_t received = 0;
    int64_t total = -1;
  };

  bool is_open(uint64_t id) const { return id < status_.size() && status_[id] == Status::kOpen; }
  void resolve(uint64_t id, Status st);
  void fail_sdu(uint64_t id, SimTime now);
  void release_in_order(SimTime now, std::vector<RlcSdu>* out);

  Bearer bearer_;
  RlcConfig cfg_;
  DeliverFn deliver_fn_;
  FailFn fail_fn_;

  uint64_t next_id_ = 0;
  std::vector<Status> status_;
  std::vector<RlcSdu> sdus_;  // by id; kept so the receiver can hand back metadata
  uint64_t open_ = 0;

  std::deque<TxSdu> tx_queue_;
  std::deque<RlcPdu> retx_queue_;
  std::map<uint64_t, int> in_flight_;  // sdu_id -> PDUs awaiting a MAC verdict
  int64_t queued_bytes_ = 0;

  std::map<uint64_t, RxSdu> rx_partial_;
  std::map<uint64_t, bool> rx_complete_;  // AM: complete SDUs held for in-order release
  uint64_t next_release_ = 0;             // AM in-order pointer

  RlcCounters counters_;
};

}  // namespace coexist::rlc
