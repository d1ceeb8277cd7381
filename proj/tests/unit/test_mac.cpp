#include <vector>

#include "coexist/mac.hpp"
#include "coexist/rng.hpp"
#include "doctest.h"

using namespace coexist;
using namespace coexist::mac;

namespace {

SchedRequest req(int dev, Bearer b, int64_t bytes, double sinr = 15.0) {
  return SchedRequest{dev, b, Direction::kUl, bytes, sinr};
}

MacParams params() { return MacParams{}; }

}  // namespace

TEST_CASE("urllc pre-empts ai when one TB fills the band") {
  CellScheduler s(0, Direction::kUl, params());
  const std::vector<SchedRequest> r{req(1, Bearer::kAi, 1'000'000), req(0, Bearer::kUrllc, 1'000'000)};
  const TtiAllocation a = s.schedule_tti(0, r);
  REQUIRE(a.grants.size() == 1);
  CHECK(a.grants[0].device_id == 0);
  CHECK(a.grants[0].bearer == Bearer::kUrllc);
  CHECK(a.used_prbs() == 106);
  CHECK(check_strict_priority(a, r, 106).empty());
}

TEST_CASE("ai alone is granted") {
  CellScheduler s(0, Direction::kDl, params());
  const std::vector<SchedRequest> r{req(4, Bearer::kAi, 5000)};
  const TtiAllocation a = s.schedule_tti(0, r);
  REQUIRE(a.grants.size() == 1);
  CHECK(a.grants[0].bearer == Bearer::kAi);
  CHECK(a.grants[0].new_data);
}

TEST_CASE("urllc round robin across TTIs") {
  CellScheduler s(0, Direction::kUl, params());
  const std::vector<SchedRequest> r{req(0, Bearer::kUrllc, 1'000'000), req(1, Bearer::kUrllc, 1'000'000)};
  const TtiAllocation t0 = s.schedule_tti(0, r);
  const TtiAllocation t1 = s.schedule_tti(1, r);
  REQUIRE(t0.grants.size() == 1);
  REQUIRE(t1.grants.size() == 1);
  CHECK(t0.grants[0].device_id != t1.grants[0].device_id);
  const TtiAllocation t2 = s.schedule_tti(2, r);
  CHECK(t2.grants[0].device_id == t0.grants[0].device_id);
}

TEST_CASE("grants are contiguous from PRB 0") {
  CellScheduler s(0, Direction::kUl, params());
  const std::vector<SchedRequest> r{req(0, Bearer::kUrllc, 64), req(1, Bearer::kUrllc, 64), req(2, Bearer::kAi, 1'000'000)};
  const TtiAllocation a = s.schedule_tti(0, r);
  REQUIRE(a.grants.size() == 3);
  int next = 0;
  for (const Grant& g : a.grants) {
    CHECK(g.prbs.start == next);
    next = g.prbs.end();
  }
  CHECK(a.grants.back().bearer == Bearer::kAi);
  CHECK(a.used_prbs() == 106);
}

TEST_CASE("harq verdicts") {
  HarqProcess p;
  p.max_tx = 2;
  p.tx_count = 1;
  CHECK(harq_verdict(p, false) == HarqResult::kRetransmit);
  p.tx_count = 2;
  CHECK(harq_verdict(p, false) == HarqResult::kDropped);
  CHECK(harq_verdict(p, true) == HarqResult::kDelivered);
}

TEST_CASE("urllc DL dropped after the second nack") {
  MacParams mp;
  mp.max_tx_urllc = 2;
  CellScheduler s(0, Direction::kDl, mp);
  const std::vector<SchedRequest> r{req(0, Bearer::kUrllc, 80)};
  const TtiAllocation a = s.schedule_tti(0, r);
  const uint64_t id = a.grants.at(0).harq_id;
  CHECK(s.on_harq_feedback(id, false, 4) == HarqResult::kRetransmit);
  CHECK(s.pending_retx(3).empty());
  CHECK(s.pending_retx(4).size() == 1);
  const TtiAllocation re = s.schedule_tti(4, {});
  REQUIRE(re.grants.size() == 1);
  CHECK_FALSE(re.grants[0].new_data);
  CHECK(re.grants[0].harq_id == id);
  HarqProcess done;
  CHECK(s.on_harq_feedback(id, false, 8, &done) == HarqResult::kDropped);
  CHECK(done.tx_count == 2);
  CHECK(s.active_processes() == 0);
}

TEST_CASE("ack on first attempt frees the process") {
  CellScheduler s(0, Direction::kUl, params());
  const TtiAllocation a = s.schedule_tti(0, std::vector<SchedRequest>{req(0, Bearer::kUrllc, 64)});
  CHECK(s.on_harq_feedback(a.grants[0].harq_id, true, 4) == HarqResult::kDelivered);
  CHECK(s.active_processes() == 0);
}

TEST_CASE("ai delivered on the 10th attempt") {
  CellScheduler s(0, Direction::kUl, params());
  const TtiAllocation a = s.schedule_tti(0, std::vector<SchedRequest>{req(0, Bearer::kAi, 9000)});
  const uint64_t id = a.grants.at(0).harq_id;
  int64_t tti = 0;
  for (int nack = 0; nack < 9; ++nack) {
    tti += 4;
    REQUIRE(s.on_harq_feedback(id, false, tti) == HarqResult::kRetransmit);
    REQUIRE(s.schedule_tti(tti, {}).grants.size() == 1);
  }
  HarqProcess done;
  CHECK(s.on_harq_feedback(id, true, tti + 4, &done) == HarqResult::kDelivered);
  CHECK(done.tx_count == 10);
}

TEST_CASE("retransmissions come before new data") {
  CellScheduler s(0, Direction::kUl, params());
  const TtiAllocation a = s.schedule_tti(0, std::vector<SchedRequest>{req(5, Bearer::kAi, 1'000'000)});
  s.on_harq_feedback(a.grants[0].harq_id, false, 4);
  const std::vector<SchedRequest> r{req(0, Bearer::kUrllc, 1'000'000)};
  const TtiAllocation b = s.schedule_tti(4, r);
  REQUIRE(b.grants.size() == 1);
  CHECK(b.grants[0].bearer == Bearer::kAi);
  CHECK_FALSE(b.grants[0].new_data);
}

TEST_CASE("flush drops a device's processes") {
  CellScheduler s(0, Direction::kUl, params());
  const std::vector<SchedRequest> r{req(0, Bearer::kAi, 5000), req(1, Bearer::kAi, 5000)};
  s.schedule_tti(0, r);
  CHECK(s.active_processes() == 2);
  s.flush(0, Bearer::kAi);
  CHECK(s.active_processes() == 1);
}

TEST_CASE("priority checker flags a handcrafted violation") {
  TtiAllocation a;
  Grant g;
  g.device_id = 2;
  g.bearer = Bearer::kAi;
  g.prbs = {0, 10};
  a.grants.push_back(g);
  const std::vector<SchedRequest> r{req(0, Bearer::kUrllc, 64), req(2, Bearer::kAi, 5000)};
  CHECK_FALSE(check_strict_priority(a, r, 106).empty());
  a.grants[0].prbs = {0, 106};
  // no PRB left over for URLLC, but an AI new TB still took them first
  CHECK_FALSE(check_strict_priority(a, r, 106).empty());

  TtiAllocation overlap;
  g.prbs = {0, 10};
  overlap.grants.push_back(g);
  g.prbs = {5, 10};
  overlap.grants.push_back(g);
  CHECK_FALSE(check_prb_budget(overlap, 106).empty());
}

TEST_CASE("random traffic never breaks priority or PRB budget") {
  RngStream rng(21, "mac.property");
  CellScheduler s(0, Direction::kUl, params());
  std::vector<std::pair<int64_t, uint64_t>> pending;  // (feedback tti, harq id)
  for (int64_t tti = 0; tti < 3000; ++tti) {
    std::vector<SchedRequest> r;
    for (int d = 0; d < 12; ++d) {
      if (rng.bernoulli(0.3)) {
        const Bearer b = d < 6 ? Bearer::kUrllc : Bearer::kAi;
        const int64_t bytes = b == Bearer::kUrllc ? 69 : 1 + static_cast<int64_t>(rng.uniform_int(40000));
        r.push_back(req(d, b, bytes, rng.uniform(-5, 25)));
      }
    }
    const TtiAllocation a = s.schedule_tti(tti, r);
    REQUIRE(check_prb_budget(a, 106).empty());
    REQUIRE(check_strict_priority(a, r, 106).empty());
    for (const Grant& g : a.grants) pending.emplace_back(tti + 4, g.harq_id);
    std::vector<std::pair<int64_t, uint64_t>> keep;
    for (auto [when, id] : pending) {
      if (when == tti + 1) {
        s.on_harq_feedback(id, rng.bernoulli(0.7), tti + 1);
      } else {
        keep.emplace_back(when, id);
      }
    }
    pending.swap(keep);
  }
}
