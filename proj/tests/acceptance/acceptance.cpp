// Acceptance harness: one PASS/FAIL line per criterion, exit code 1 when any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coexist/config.hpp"
#include "coexist/experiments.hpp"
#include "coexist/fl.hpp"
#include "coexist/metrics.hpp"
#include "coexist/rng.hpp"
#include "coexist/scenario.hpp"

using namespace coexist;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1: order statistic vs min over subsets of the max

double subset_oracle(const std::vector<double>& c, int n, double d_pr) {
  const int m = static_cast<int>(c.size());
  double best = INFINITY;
  for (uint32_t mask = 1; mask < (1u << m); ++mask) {
    if (std::popcount(mask) != n) continue;
    double worst = -INFINITY;
    for (int i = 0; i < m; ++i) {
      if (mask >> i & 1u) worst = std::max(worst, c[i]);
    }
    best = std::min(best, worst);
  }
  return best + d_pr;
}

Verdict iteration_delay_oracle() {
  const auto t0 = Clock::now();
  RngStream rng(2024, "acceptance.delay");
  int mismatches = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int m = 1 + static_cast<int>(rng.uniform_int(12));
    const int n = 1 + static_cast<int>(rng.uniform_int(m));
    std::vector<double> c(m);
    // some ties on purpose
    for (double& v : c) v = rng.bernoulli(0.25) ? std::floor(rng.uniform(0, 4)) : rng.uniform(0, 50);
    const double d_pr = rng.uniform(0, 0.1);
    if (fl::iteration_delay(c, n, d_pr) != subset_oracle(c, n, d_pr)) ++mismatches;
  }
  const double dt = seconds_since(t0);
  return {mismatches == 0 && dt < 10.0, fmt("1000 instances, %d mismatches, %.2f s", mismatches, dt)};
}

// ---------------------------------------------------------------------------
// 2: survival window + availability

metrics::StateTrace make_trace(std::vector<metrics::Transition> tr, SimTime horizon) {
  metrics::StateTrace x;
  x.transitions = std::move(tr);
  x.horizon = horizon;
  return x;
}

Verdict availability_oracle() {
  const auto t0 = Clock::now();
  const SimTime s5 = SimTime::from_ms(5000), s100 = SimTime::from_ms(100000);
  bool worked = true;
  {
    const auto x = make_trace({{SimTime::from_ms(10000), 0}, {SimTime::from_ms(20000), 1}}, s100);
    worked &= metrics::availability(metrics::apply_survival(x, s5), s100) == 0.95;
  }
  {
    const auto x = make_trace({{SimTime{}, 0}}, s100);
    worked &= metrics::availability(metrics::apply_survival(x, s5), s100) == 0.05;
  }
  {
    const auto x = make_trace({}, s100);
    worked &= metrics::availability(metrics::apply_survival(x, s5), s100) == 1.0;
    const auto short_outage = make_trace({{SimTime::from_ms(50), 0}, {SimTime::from_ms(54), 1}}, s100);
    worked &= metrics::availability(metrics::apply_survival(short_outage, SimTime::from_ms(5)), s100) == 1.0;
  }

  RngStream rng(2024, "acceptance.grid");
  const int64_t step = 1'000'000;  // 1 ms
  int bad = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const SimTime horizon = SimTime::from_ms(5000);
    const int64_t w = static_cast<int64_t>(rng.uniform_int(15));
    std::vector<metrics::Transition> tr;
    uint8_t v = 1;
    int64_t t = static_cast<int64_t>(rng.uniform_int(100'000'000));
    while (t < horizon.ns()) {
      v ^= 1;
      tr.push_back({SimTime::from_ns(t), v});
      t += 1 + static_cast<int64_t>(rng.uniform_int(v ? 80'000'000 : 30'000'000));
    }
    const auto x = make_trace(tr, horizon);
    const double exact = metrics::availability(metrics::apply_survival(x, SimTime::from_ms(w)), horizon);

    // Y(t) = 0 iff X = 0 at every grid point of [t - T_sv, t]; X = 1 before 0
    const int64_t cells = horizon.ns() / step;
    std::vector<uint8_t> xs(cells);
    size_t k = 0;
    uint8_t cur = 1;
    for (int64_t j = 0; j < cells; ++j) {
      while (k < tr.size() && tr[k].time.ns() <= j * step) cur = tr[k++].value;
      xs[j] = cur;
    }
    int64_t up = 0, zero_run = 0;
    for (int64_t j = 0; j < cells; ++j) {
      zero_run = xs[j] == 0 ? zero_run + 1 : 0;
      up += !(zero_run > w);
    }
    const double grid = static_cast<double>(up) / static_cast<double>(cells);
    // each Y edge may move by one grid step
    const double tol = static_cast<double>(tr.size() + 1) / static_cast<double>(cells);
    worst = std::max(worst, std::abs(exact - grid) / tol);
    if (std::abs(exact - grid) > tol) ++bad;
  }
  const double dt = seconds_since(t0);
  return {worked && bad == 0 && dt < 30.0,
          fmt("worked cases %s, 200 random traces: %d outside one grid step (worst %.2f steps-ratio), %.2f s",
              worked ? "exact" : "WRONG", bad, worst, dt)};
}

// ---------------------------------------------------------------------------
// shared desk sweep for 3, 6, 7, 8

struct Point {
  int n_devices;
  double eta;
};

struct Sweep {
  std::map<std::pair<int, int>, std::vector<RunResult>> runs;  // (N, eta*1000)
  double seconds = 0;

  const std::vector<RunResult>& at(int n, double eta) const {
    return runs.at({n, static_cast<int>(std::lround(eta * 1000))});
  }
};

Sweep run_desk_sweep(const ScenarioConfig& base, int seeds) {
  const std::vector<Point> points{{0, 1.0}, {10, 1.0}, {30, 1.0}, {60, 1.0}, {60, 0.4}, {50, 0.6}};
  std::vector<experiments::RunSpec> specs;
  for (const Point& p : points) {
    for (uint64_t seed : experiments::sweep_seeds(base, seeds)) {
      specs.push_back({fmt("N%d_eta%g_s%llu", p.n_devices, p.eta, static_cast<unsigned long long>(seed)),
                       experiments::with_fl_point(base, p.n_devices, p.eta), seed});
    }
  }
  const auto t0 = Clock::now();
  std::vector<RunResult> results = experiments::execute(specs, 0);
  Sweep s;
  s.seconds = seconds_since(t0);
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& c = specs[i].cfg;
    s.runs[{c.fl.n_devices, static_cast<int>(std::lround(c.eta * 1000))}].push_back(std::move(results[i]));
  }
  return s;
}

std::vector<double> pooled_availability(const std::vector<RunResult>& runs) {
  std::vector<double> out;
  for (const RunResult& r : runs) {
    for (double a : r.combined_availability()) out.push_back(a);
  }
  return out;
}

std::vector<double> pooled_delays(const std::vector<RunResult>& runs) {
  std::vector<double> out;
  for (const RunResult& r : runs) {
    for (double d : r.round_delays()) out.push_back(d);
  }
  return out;
}

double median_or_nan(const std::vector<double>& v) { return v.empty() ? NAN : metrics::percentile(v, 0.5); }

Verdict strict_priority(const Sweep& s) {
  uint64_t violations = 0, prb = 0, runs = 0, ttis = 0, ai_tbs = 0;
  for (const auto& [key, list] : s.runs) {
    if (key.first == 0) continue;
    for (const RunResult& r : list) {
      violations += r.diag.priority_violations;
      prb += r.diag.prb_violations;
      ttis += r.diag.ttis;
      ai_tbs += r.diag.tb_ai;
      ++runs;
    }
  }
  return {violations == 0 && prb == 0 && ai_tbs > 0,
          fmt("%llu coexistence runs, %llu scheduler TTIs scanned, %llu AI TBs, %llu priority / %llu PRB violations",
              (unsigned long long)runs, (unsigned long long)ttis, (unsigned long long)ai_tbs,
              (unsigned long long)violations, (unsigned long long)prb)};
}

Verdict availability_trend(const Sweep& s) {
  std::string d;
  bool monotone = true;
  double prev = INFINITY;
  for (int n : {0, 10, 30, 60}) {
    const auto a = pooled_availability(s.at(n, 1.0));
    const double med = metrics::percentile(a, 0.5);
    const double p01 = metrics::percentile(a, 0.01);
    d += fmt("N=%d med %.5f p1 %.5f; ", n, med, p01);
    if (n > 0) monotone &= med <= prev;
    if (n > 0) prev = med;
  }
  const double base_p01 = metrics::percentile(pooled_availability(s.at(0, 1.0)), 0.01);
  const double p01_60 = metrics::percentile(pooled_availability(s.at(60, 1.0)), 0.01);
  const double gap = base_p01 - p01_60;
  d += fmt("p1 gap at N=60 %.4f (need >= 0.01), median non-increasing: %s", gap, monotone ? "yes" : "no");
  return {monotone && gap >= 0.01, d};
}

Verdict eta_delay_trend(const Sweep& s) {
  const auto lo = pooled_delays(s.at(60, 0.4));
  const auto hi = pooled_delays(s.at(60, 1.0));
  const double m_lo = median_or_nan(lo), m_hi = median_or_nan(hi);
  const bool ok = !lo.empty() && !hi.empty() && m_hi >= 1.10 * m_lo;
  return {ok, fmt("N=60 median d_k: eta=0.4 %.3f s (%zu rounds), eta=1.0 %.3f s (%zu rounds), ratio %.3f (need >= 1.10)",
                  m_lo, lo.size(), m_hi, hi.size(), m_hi / m_lo)};
}

Verdict diversity_backfire(const Sweep& s) {
  const auto d30 = pooled_delays(s.at(30, 1.0));
  const auto d50 = pooled_delays(s.at(50, 0.6));
  const double m30 = median_or_nan(d30), m50 = median_or_nan(d50);
  const double a30 = metrics::percentile(pooled_availability(s.at(30, 1.0)), 0.01);
  const double a50 = metrics::percentile(pooled_availability(s.at(50, 0.6)), 0.01);
  const bool delay_ok = !d30.empty() && !d50.empty() && m50 > m30;
  const bool avail_ok = a50 < a30;
  return {delay_ok && avail_ok,
          fmt("n=30: median d_k N=30 %.3f s vs N=50 %.3f s (%s); p1 availability N=30 %.5f vs N=50 %.5f (%s)", m30,
              m50, delay_ok ? "ok" : "WRONG DIRECTION", a30, a50, avail_ok ? "ok" : "WRONG DIRECTION")};
}

// ---------------------------------------------------------------------------
// 4: AM exactly-once under forced loss

Verdict am_exactly_once() {
  const ScenarioConfig cfg = parse_config_text(
      "[sim]\nprofile = desk\nduration_s = 14\ncheck_invariants = true\n"
      "[deployment]\nurllc_devices = 2\n"
      "[fl]\nN = 3\nparams = 20000\n"
      "[rlc]\nforced_pdu_loss = 0.3\n");
  const auto t0 = Clock::now();
  const RunResult r = run_scenario(cfg, 7);
  const auto& d = r.diag;
  const uint64_t rounds = r.rounds.size();
  bool every_round_delivered = true;
  for (const auto& rec : r.rounds) {
    for (const auto& det : rec.detail) every_round_delivered &= det.d_dl_s >= 0;
  }
  const uint64_t n = static_cast<uint64_t>(cfg.fl.n_devices);
  const bool counts = d.ai_dl.delivered >= rounds * n && d.ai_dl.delivered <= (rounds + 1) * n;
  const bool ok = rounds >= 100 && d.invariant_failures.empty() && d.invariant_checks == d.events &&
                  d.ai_duplicate_deliveries == 0 && d.ai_dl_out_of_order == 0 && d.ai_ul_out_of_order == 0 &&
                  d.ai_dl.failed == 0 && d.ai_dl.discarded == 0 && every_round_delivered && counts;
  std::string detail = fmt(
      "%llu rounds, %llu model SDUs delivered, dup %llu, out-of-order %llu/%llu, failed %llu, flushed %llu, "
      "invariant scans %llu/%llu events, violations %zu, %.1f s",
      (unsigned long long)rounds, (unsigned long long)d.ai_dl.delivered,
      (unsigned long long)d.ai_duplicate_deliveries, (unsigned long long)d.ai_dl_out_of_order,
      (unsigned long long)d.ai_ul_out_of_order, (unsigned long long)d.ai_dl.failed,
      (unsigned long long)d.ai_dl.discarded, (unsigned long long)d.invariant_checks, (unsigned long long)d.events,
      d.invariant_failures.size(), seconds_since(t0));
  if (!d.invariant_failures.empty()) detail += "; first: " + d.invariant_failures.front();
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 5: learner convergence + gradient-noise variance

Verdict learner_convergence() {
  const ScenarioConfig cfg = parse_config_text(
      "[sim]\nprofile = desk\nduration_s = 30\n"
      "[deployment]\nurllc_devices = 0\n"
      "[fl]\nN = 10\neta = 1\nparams = 20000\n"
      "[radio]\nbler_override = 0\n");
  const RunResult r = run_scenario(cfg, 5);
  bool monotone = true;
  int hit = -1;
  double prev = INFINITY;
  // below ~1e-12 the iterate sits at double round-off around w*
  const double floor = 1e-12;
  for (size_t k = 0; k < r.rounds.size() && k < 200; ++k) {
    const double dist = r.rounds[k].dist_to_wstar;
    if (prev > floor) monotone &= dist < prev;
    prev = dist;
    if (hit < 0 && dist <= 1e-6) hit = static_cast<int>(k) + 1;
  }
  // contraction per round should be roughly constant (geometric)
  double ratio_lo = INFINITY, ratio_hi = 0;
  for (size_t k = 5; k < r.rounds.size() && k < 40; ++k) {
    const double q = r.rounds[k].dist_to_wstar / r.rounds[k - 1].dist_to_wstar;
    ratio_lo = std::min(ratio_lo, q);
    ratio_hi = std::max(ratio_hi, q);
  }

  // gradient noise over random n-subsets, N = 10
  RngStream prob_rng(cfg.sim.seed, "learner");
  const int N = 10;
  const fl::LearnerProblem p = fl::make_problem(N, cfg.fl.dim, prob_rng);
  const fl::Vec w = fl::Vec::Zero(cfg.fl.dim);
  std::vector<fl::Vec> g;
  fl::Vec mean = fl::Vec::Zero(cfg.fl.dim);
  for (int i = 0; i < N; ++i) {
    g.push_back(p.gradient(i, w));
    mean += g.back() / N;
  }
  double s2 = 0;
  for (const auto& gi : g) s2 += (gi - mean).squaredNorm();
  s2 /= N - 1;
  RngStream rng(cfg.sim.seed, "acceptance.subsets");
  bool var_monotone = true, var_oracle = true;
  double prev_var = INFINITY;
  std::string vars;
  for (int n = 2; n <= N; ++n) {
    double acc = 0;
    std::vector<int> idx(N);
    for (int draw = 0; draw < 10000; ++draw) {
      for (int i = 0; i < N; ++i) idx[i] = i;
      fl::Vec sum = fl::Vec::Zero(cfg.fl.dim);
      for (int k = 0; k < n; ++k) {
        std::swap(idx[k], idx[k + static_cast<int>(rng.uniform_int(N - k))]);
        sum += g[idx[k]];
      }
      acc += (sum / n - mean).squaredNorm();
    }
    const double var = acc / 10000;
    const double oracle = (1.0 - static_cast<double>(n) / N) * s2 / n;
    var_monotone &= var <= prev_var;
    var_oracle &= std::abs(var - oracle) <= 0.05 * oracle + 1e-12;
    prev_var = var;
    vars += fmt("%s%.4g", n == 2 ? "" : ",", var);
  }
  const bool ok = hit > 0 && monotone && var_monotone && var_oracle;
  return {ok, fmt("||w-w*|| <= 1e-6 after %d rounds (of %zu), monotone down to 1e-12 %s, per-round ratio %.3f..%.3f; "
                  "variance n=2..10 [%s] non-increasing %s, matches sampling formula %s",
                  hit, r.rounds.size(), monotone ? "yes" : "no", ratio_lo, ratio_hi, vars.c_str(),
                  var_monotone ? "yes" : "no", var_oracle ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9: determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb) {
    *why = "file sets differ";
    return false;
  }
  for (const std::string& f : na) {
    if (slurp(a / f) != slurp(b / f)) {
      *why = f + " differs";
      return false;
    }
  }
  return true;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "coexist_acceptance_det";
  fs::remove_all(root);
  ScenarioConfig base = parse_config_text("[sim]\nprofile = desk\nduration_s = 5\ntrace = true\n[fl]\nN = 10\n"
                                          "params = 50000\n");
  std::string why;
  bool single = true;
  {
    const std::vector<experiments::RunSpec> spec{{"run_s3", base, 3}};
    for (const char* dir : {"a", "b"}) {
      experiments::emit_csv(experiments::execute(spec, 1), spec, base, root / dir);
    }
    single = same_tree(root / "a", root / "b", &why);
  }
  base.sim.trace = false;
  const std::vector<double> etas{0.5, 1.0};
  const auto specs = experiments::plan_eval1(base, 10, etas, 3);
  experiments::emit_csv(experiments::execute(specs, 1), specs, base, root / "t1");
  experiments::emit_csv(experiments::execute(specs, 4), specs, base, root / "t4");
  std::string why_par;
  const bool parallel = same_tree(root / "t1", root / "t4", &why_par);
  fs::remove_all(root);
  return {single && parallel, fmt("repeat run byte-identical: %s%s; 6-run sweep 1 vs 4 workers identical: %s%s",
                                  single ? "yes" : "no", why.empty() ? "" : (" (" + why + ")").c_str(),
                                  parallel ? "yes" : "no", why_par.empty() ? "" : (" (" + why_par + ")").c_str())};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  };

  report(1, "iteration delay equals subset oracle", iteration_delay_oracle());
  report(2, "availability oracle", availability_oracle());

  const ScenarioConfig desk = ScenarioConfig::defaults("desk");
  const Sweep sweep = run_desk_sweep(desk, 5);
  std::printf("     desk sweep: %zu points x 5 seeds in %.1f s\n", sweep.runs.size(), sweep.seconds);

  report(3, "strict priority over desk runs", strict_priority(sweep));
  report(4, "RLC AM exactly-once under forced loss", am_exactly_once());
  report(5, "learner convergence and gradient-noise variance", learner_convergence());
  report(6, "availability falls with N", availability_trend(sweep));
  report(7, "Eval1 delay grows with eta", eta_delay_trend(sweep));
  report(8, "Eval2 diversity backfire", diversity_backfire(sweep));
  report(9, "determinism", determinism());

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
