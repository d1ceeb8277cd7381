#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "coexist/metrics.hpp"
#include "coexist/rng.hpp"
#include "doctest.h"

using namespace coexist;
using namespace coexist::metrics;

namespace {

SimTime sec(double s) { return SimTime::from_seconds(s); }

StateTrace trace(std::vector<Transition> tr, SimTime horizon) {
  StateTrace x;
  x.transitions = std::move(tr);
  x.horizon = horizon;
  return x;
}

}  // namespace

TEST_CASE("survival window on a 10 s outage") {
  const StateTrace x = trace({{sec(10), 0}, {sec(20), 1}}, sec(100));
  const StateTrace y = apply_survival(x, sec(5));
  CHECK(y.transitions == std::vector<Transition>{{sec(15), 0}, {sec(20), 1}});
  CHECK(availability(y, sec(100)) == 0.95);
}

TEST_CASE("outage shorter than survival time") {
  const StateTrace x = trace({{SimTime::from_ms(10), 0}, {SimTime::from_ms(14), 1}}, sec(1));
  const StateTrace y = apply_survival(x, SimTime::from_ms(5));
  CHECK(y.transitions.empty());
  CHECK(availability(y, sec(1)) == 1.0);
}

TEST_CASE("outage equal to survival time is tolerated") {
  const StateTrace x = trace({{SimTime::from_ms(10), 0}, {SimTime::from_ms(15), 1}}, sec(1));
  CHECK(apply_survival(x, SimTime::from_ms(5)).transitions.empty());
}

TEST_CASE("permanent outage from t=0") {
  const StateTrace x = trace({{sec(0), 0}}, sec(100));
  const StateTrace y = apply_survival(x, sec(5));
  CHECK(availability(y, sec(100)) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(y.at(sec(4.999)) == 1);
  CHECK(y.at(sec(5)) == 0);
}

TEST_CASE("zero survival time passes X through") {
  const StateTrace x = trace({{sec(1), 0}, {sec(2), 1}}, sec(10));
  CHECK(apply_survival(x, SimTime{}).transitions == x.transitions);
}

TEST_CASE("availability of an all-up trace") { CHECK(availability(trace({}, sec(100)), sec(100)) == 1.0); }

TEST_CASE("combine_and") {
  const StateTrace a = trace({{sec(1), 0}, {sec(3), 1}}, sec(10));
  const StateTrace b = trace({{sec(2), 0}, {sec(4), 1}}, sec(10));
  const StateTrace c = combine_and(a, b);
  CHECK(c.transitions == std::vector<Transition>{{sec(1), 0}, {sec(4), 1}});
  CHECK(c.valid());
  CHECK(availability(c, sec(10)) == doctest::Approx(0.7));
}

TEST_CASE("trace builder collapses redundant writes") {
  TraceBuilder b;
  b.set(sec(1), 1);
  b.set(sec(2), 0);
  b.set(sec(2), 1);
  b.set(sec(3), 0);
  b.set(sec(4), 0);
  CHECK(b.finish(sec(5)).transitions == std::vector<Transition>{{sec(3), 0}});
  CHECK_THROWS(b.set(sec(2), 1));
}

TEST_CASE("survival availability against a 1 ms grid") {
  RngStream rng(31, "metrics.grid");
  const int64_t grid_ns = 1'000'000;
  for (int trial = 0; trial < 50; ++trial) {
    const SimTime horizon = SimTime::from_ms(2000);
    const SimTime tsv = SimTime::from_ms(static_cast<int64_t>(rng.uniform_int(20)));
    std::vector<Transition> tr;
    uint8_t v = 1;
    for (int64_t t = static_cast<int64_t>(rng.uniform_int(50'000'000)); t < horizon.ns();
         t += 1 + static_cast<int64_t>(rng.uniform_int(60'000'000))) {
      v ^= 1;
      tr.push_back({SimTime::from_ns(t), v});
    }
    const StateTrace x = trace(tr, horizon);
    REQUIRE(x.valid());
    const double exact = availability(apply_survival(x, tsv), horizon);

    const int64_t cells = horizon.ns() / grid_ns;
    const int64_t w = tsv.ns() / grid_ns;
    std::vector<uint8_t> xs(cells);
    for (int64_t j = 0; j < cells; ++j) xs[j] = x.at(SimTime::from_ns(j * grid_ns));
    int64_t up = 0;
    for (int64_t j = 0; j < cells; ++j) {
      bool all_zero = j - w >= 0;
      for (int64_t k = std::max<int64_t>(0, j - w); k <= j && all_zero; ++k) all_zero = xs[k] == 0;
      up += !all_zero;
    }
    const double grid = static_cast<double>(up) / static_cast<double>(cells);
    const double tol = static_cast<double>(2 * tr.size() + 2) / static_cast<double>(cells);
    CHECK(std::abs(exact - grid) <= tol);
  }
}

TEST_CASE("availability falls as outages lengthen and rises with survival time") {
  double prev = 1.1;
  for (int len = 1; len < 40; ++len) {
    const StateTrace x = trace({{SimTime::from_ms(100), 0}, {SimTime::from_ms(100 + len), 1}}, sec(1));
    const double a = availability(apply_survival(x, SimTime::from_ms(5)), sec(1));
    CHECK(a <= prev);
    prev = a;
  }
  const StateTrace x = trace({{SimTime::from_ms(100), 0}, {SimTime::from_ms(140), 1}}, sec(1));
  prev = -1;
  for (int tsv = 0; tsv < 50; tsv += 5) {
    const double a = availability(apply_survival(x, SimTime::from_ms(tsv)), sec(1));
    CHECK(a >= prev);
    prev = a;
  }
}

TEST_CASE("requirement check") {
  std::vector<double> s(99, 0.99);
  s.push_back(0.90);
  const RequirementResult r = requirement_check(s, 0.95, 0.01);
  CHECK(r.violation_probability == doctest::Approx(0.01));
  CHECK(r.pass);
  CHECK(requirement_check(std::vector<double>(10, 1.0), 0.95, 0.01).pass);
  const RequirementResult bad = requirement_check(std::vector<double>(10, 0.90), 0.95, 0.01);
  CHECK(bad.violation_probability == 1.0);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile(v, 0.01) == 1.0);
  CHECK(percentile(v, 0.50) == 50.0);
  CHECK(percentile(std::vector<double>{3, 1, 2}, 0.75) == 3.0);
  CHECK_THROWS(percentile(std::vector<double>{}, 0.5));
}

TEST_CASE("box stats") {
  const BoxStats b = box_stats(std::vector<double>{1, 2, 3, 4, 100});
  CHECK(b.min == 1);
  CHECK(b.q25 == 2);
  CHECK(b.median == 3);
  CHECK(b.q75 == 4);
  CHECK(b.max == 100);
  const BoxStats one = box_stats(std::vector<double>{7});
  CHECK((one.min == 7 && one.q25 == 7 && one.median == 7 && one.q75 == 7 && one.max == 7));
  const BoxStats flat = box_stats(std::vector<double>(9, 0.5));
  CHECK(flat.min == flat.max);
}
