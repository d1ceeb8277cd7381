// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace coexist::experiments {
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

ScenarioConfig with_fl_point(const ScenarioConfig& base, int n_devices, double eta) {
  ScenarioConfig cfg = base;
  cfg.fl.n_devices = n_devices;
  cfg.eta = eta;
  cfg.fl.n_required = n_devices > 0 ? required_uploads(eta, n_devices) : 0;
  return cfg;
}

std::vector<uint64_t> sweep_seeds(const ScenarioConfig& base, int seeds) {
  std::vector<uint64_t> out;
  for (int s = 0; s < seeds; ++s) out.push_back(base.sim.seed + static_cast<uint64_t>(s));
  return out;
}

namespace {

std::string point_id(int n_devices, double eta, uint64_t seed) {
  return "N" + std::to_string(n_devices) + "_eta" + format_double(eta) + "_s" + std::to_string(seed);
}

}  // namespace

std::vector<RunSpec> plan_eval1(const ScenarioConfig& base, int n_devices, std::span<const double> etas, int seeds) {
  if (n_devices < 1) throw std::invalid_argument("eval1: N must be >= 1");
  if (seeds < 1) throw std::invalid_argument("eval1: seeds must be >= 1");
  for (double eta : etas) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eval1: eta " + format_double(eta) + " outside (0, 1]");
  }
  std::vector<RunSpec> out;
  for (double eta : etas) {
    for (uint64_t seed : sweep_seeds(base, seeds)) {
      out.push_back({point_id(n_devices, eta, seed), with_fl_point(base, n_devices, eta), seed});
    }
  }
  return out;
}

std::vector<RunSpec> plan_eval2(const ScenarioConfig& base, int n_required, std::span<const int> n_list, int seeds) {
  if (n_required < 1) throw std::invalid_argument("eval2: n must be >= 1");
  if (seeds < 1) throw std::invalid_argument("eval2: seeds must be >= 1");
  for (int n : n_list) {
    if (n < n_required) {
      throw std::invalid_argument("eval2: N=" + std::to_string(n) + " below n=" + std::to_string(n_required));
    }
  }
  std::vector<RunSpec> out;
  for (int n : n_list) {
    const double eta = static_cast<double>(n_required) / n;
    for (uint64_t seed : sweep_seeds(base, seeds)) {
      ScenarioConfig cfg = base;
      cfg.fl.n_devices = n;
      cfg.fl.n_required = n_required;
      cfg.eta = eta;
      out.push_back({point_id(n, eta, seed), cfg, seed});
    }
  }
  return out;
}

std::vector<RunResult> execute(const std::vector<RunSpec>& specs, unsigned threads) {
  std::vector<RunResult> results(specs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(1, specs.size())));
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = run_scenario(specs[i].cfg, specs[i].seed, specs[i].run_id);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<RunResult> sweep_eval1(const ScenarioConfig& base, int n_devices, std::span<const double> etas, int seeds,
                                   unsigned threads) {
  return execute(plan_eval1(base, n_devices, etas, seeds), threads);
}

std::vector<RunResult> sweep_eval2(const ScenarioConfig& base, int n_required, std::span<const int> n_list, int seeds,
                                   unsigned threads) {
  return execute(plan_eval2(base, n_required, n_list, seeds), threads);
}

std::vector<UrllcRow> urllc_rows(const std::vector<RunResult>& results) {
  std::vector<UrllcRow> out;
  for (const RunResult& r : results) {
    for (const UrllcDeviceResult& u : r.urllc) {
      out.push_back({r.run_id, r.seed, r.n_devices, r.eta, r.n_required, r.model_bytes, u.device_id, u.avail_ul,
                     u.avail_dl, u.avail_combined});
    }
  }
  return out;
}

std::vector<AiRow> ai_rows(const std::vector<RunResult>& results) {
  std::vector<AiRow> out;
  for (const RunResult& r : results) {
    for (const fl::RoundRecord& k : r.rounds) {
      out.push_back({r.run_id, r.seed, r.n_devices, r.eta, r.n_required, r.model_bytes, k.k, k.d_k_ai_s,
                     k.n_received_at_update, k.dist_to_wstar});
    }
  }
  return out;
}

std::vector<PointSummary> summarize(const std::vector<UrllcRow>& urllc, const std::vector<AiRow>& ai, double a_req,
                                    double gamma) {
  using Key = std::tuple<int, double, int, int64_t>;
  struct Acc {
    std::set<std::string> runs;
    std::vector<double> avail;
    std::vector<double> delay;
  };
  std::map<Key, Acc> groups;
  for (const UrllcRow& r : urllc) {
    Acc& a = groups[{r.n_devices, r.eta, r.n_required, r.model_bytes}];
    a.runs.insert(r.run_id);
    a.avail.push_back(r.avail_combined);
  }
  for (const AiRow& r : ai) {
    Acc& a = groups[{r.n_devices, r.eta, r.n_required, r.model_bytes}];
    a.runs.insert(r.run_id);
    a.delay.push_back(r.d_k_ai_s);
  }
  std::vector<PointSummary> out;
  for (const auto& [key, acc] : groups) {
    PointSummary p;
    std::tie(p.n_devices, p.eta, p.n_required, p.model_bytes) = key;
    p.runs = static_cast<int>(acc.runs.size());
    p.avail_samples = acc.avail.size();
    if (!acc.avail.empty()) {
      p.avail_median = metrics::percentile(acc.avail, 0.5);
      p.avail_p01 = metrics::percentile(acc.avail, 0.01);
      p.requirement = metrics::requirement_check(acc.avail, a_req, gamma);
    }
    p.rounds = acc.delay.size();
    if (!acc.delay.empty()) p.delay = metrics::box_stats(acc.delay);
    out.push_back(p);
  }
  return out;
}

std::string format_summary(const std::vector<PointSummary>& points) {
  std::ostringstream os;
  os << std::left << std::setw(5) << "N" << std::setw(8) << "eta" << std::setw(5) << "n" << std::setw(6) << "runs"
     << std::setw(11) << "a_median" << std::setw(11) << "a_p01" << std::setw(9) << "req" << std::setw(8) << "rounds"
     << std::setw(10) << "d_min" << std::setw(10) << "d_q25" << std::setw(10) << "d_med" << std::setw(10) << "d_q75"
     << "d_max\n";
  os << std::fixed;
  for (const PointSummary& p : points) {
    os << std::setw(5) << p.n_devices << std::setw(8) << std::setprecision(3) << p.eta << std::setw(5) << p.n_required
       << std::setw(6) << p.runs << std::setprecision(5) << std::setw(11) << p.avail_median << std::setw(11)
       << p.avail_p01 << std::setw(9) << (p.avail_samples == 0 ? "-" : p.requirement.pass ? "pass" : "fail")
       << std::setw(8) << p.rounds << std::setprecision(3);
    if (p.rounds == 0) {
      os << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(10) << "-" << "-\n";
    } else {
      os << std::setw(10) << p.delay.min << std::setw(10) << p.delay.q25 << std::setw(10) << p.delay.median
         << std::setw(10) << p.delay.q75 << p.delay.max << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Output

namespace {

class StagedWriter {
 public:
  explicit StagedWriter(fs::path dir) : dir_(std::move(dir)) {}
  ~StagedWriter() {
    if (!committed_) {
      std::error_code ec;
      for (const auto& [name, tmp] : staged_) fs::remove(tmp, ec);
    }
  }

  std::ofstream& open(const std::string& name) {
    const fs::path tmp = dir_ / (".tmp." + name);
    staged_.emplace_back(name, tmp);
    streams_.emplace_back(tmp, std::ios::binary | std::ios::trunc);
    if (!streams_.back()) throw OutputError("cannot open " + tmp.string());
    return streams_.back();
  }

  void commit() {
    for (auto& s : streams_) {
      s.flush();
      if (!s) throw OutputError("write failed in " + dir_.string());
      s.close();
    }
    for (const auto& [name, tmp] : staged_) {
      std::error_code ec;
      fs::rename(tmp, dir_ / name, ec);
      if (ec) throw OutputError("cannot rename " + tmp.string() + ": " + ec.message());
    }
    committed_ = true;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, fs::path>> staged_;
  std::vector<std::ofstream> streams_;
  bool committed_ = false;
};

std::string d(double v) { return format_double(v); }

}  // namespace

void emit_csv(const std::vector<RunResult>& results, const std::vector<RunSpec>& specs, const ScenarioConfig& base,
              const fs::path& out_dir) {
  if (results.size() != specs.size()) throw std::invalid_argument("emit_csv: results and specs differ in length");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create " + out_dir.string() + ": " + ec.message());

  StagedWriter w(out_dir);
  {
    auto& f = w.open("kpi_urllc.csv");
    f << "run_id,seed,N,eta,n,model_bytes,device_id,avail_ul,avail_dl,avail_combined\n";
    for (const UrllcRow& r : urllc_rows(results)) {
      f << r.run_id << ',' << r.seed << ',' << r.n_devices << ',' << d(r.eta) << ',' << r.n_required << ','
        << r.model_bytes << ',' << r.device_id << ',' << d(r.avail_ul) << ',' << d(r.avail_dl) << ','
        << d(r.avail_combined) << '\n';
    }
  }
  {
    auto& f = w.open("kpi_ai.csv");
    f << "run_id,seed,N,eta,n,model_bytes,round_k,d_k_ai_s,n_received_at_update,dist_to_wstar\n";
    for (const AiRow& r : ai_rows(results)) {
      f << r.run_id << ',' << r.seed << ',' << r.n_devices << ',' << d(r.eta) << ',' << r.n_required << ','
        << r.model_bytes << ',' << r.round_k << ',' << d(r.d_k_ai_s) << ',' << r.n_received_at_update << ','
        << d(r.dist_to_wstar) << '\n';
    }
  }
  {
    auto& f = w.open("ai_round_detail.csv");
    f << "run_id,round_k,device_id,d_dl_s,d_compute_s,d_ul_s,in_first_n\n";
    for (const RunResult& r : results) {
      for (const fl::RoundRecord& k : r.rounds) {
        for (const auto& det : k.detail) {
          f << r.run_id << ',' << k.k << ',' << det.device_id << ',' << d(det.d_dl_s) << ',' << d(det.d_compute_s)
            << ',' << d(det.d_ul_s) << ',' << (det.in_first_n ? 1 : 0) << '\n';
        }
      }
    }
  }
  std::map<std::string, const ScenarioConfig*> configs;
  {
    auto& f = w.open("run_manifest.csv");
    f << "run_id,seed,N,eta,n,model_bytes,config_hash,config_file\n";
    for (size_t i = 0; i < results.size(); ++i) {
      const RunResult& r = results[i];
      configs.emplace(r.config_hash, &specs[i].cfg);
      f << r.run_id << ',' << r.seed << ',' << r.n_devices << ',' << d(r.eta) << ',' << r.n_required << ','
        << r.model_bytes << ',' << r.config_hash << ",config_" << r.config_hash << ".cfg\n";
    }
  }
  w.open("config_echo.cfg") << base.to_text();
  for (const auto& [hash, cfg] : configs) w.open("config_" + hash + ".cfg") << cfg->to_text();

  bool any_trace = false;
  for (const RunResult& r : results) any_trace = any_trace || !r.allocation_trace.empty();
  if (any_trace) {
    auto& f = w.open("allocation_trace.csv");
    f << "run_id,tti,cell,direction,device_id,bearer,prb_start,prb_count,mcs,tb_bits,new_data,decoded,sinr_db\n";
    for (const RunResult& r : results) {
      for (const AllocationTraceRow& t : r.allocation_trace) {
        f << r.run_id << ',' << t.tti << ',' << t.cell << ',' << to_string(t.direction) << ',' << t.device_id << ','
          << to_string(t.bearer) << ',' << t.prb_start << ',' << t.prb_count << ',' << t.mcs << ',' << t.tb_bits << ','
          << (t.new_data ? 1 : 0) << ',' << (t.decoded ? 1 : 0) << ',' << d(t.sinr_db) << '\n';
      }
    }
  }
  w.commit();
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw OutputError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != expected_header) {
    throw OutputError(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_d(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw OutputError("bad number '" + s + "'");
  return v;
}

template <typename T>
T to_i(const std::string& s) {
  T v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw OutputError("bad integer '" + s + "'");
  return v;
}

}  // namespace

std::vector<PointSummary> report(const fs::path& in_dir, double a_req, double gamma) {
  std::vector<UrllcRow> urllc;
  for (const auto& c : read_csv(in_dir / "kpi_urllc.csv",
                                "run_id,seed,N,eta,n,model_bytes,device_id,avail_ul,avail_dl,avail_combined")) {
    if (c.size() != 10) throw OutputError("kpi_urllc.csv: expected 10 columns");
    urllc.push_back({c[0], to_i<uint64_t>(c[1]), to_i<int>(c[2]), to_d(c[3]), to_i<int>(c[4]), to_i<int64_t>(c[5]),
                     to_i<int>(c[6]), to_d(c[7]), to_d(c[8]), to_d(c[9])});
  }
  std::vector<AiRow> ai;
  for (const auto& c : read_csv(in_dir / "kpi_ai.csv",
                                "run_id,seed,N,eta,n,model_bytes,round_k,d_k_ai_s,n_received_at_update,dist_to_wstar")) {
    if (c.size() != 10) throw OutputError("kpi_ai.csv: expected 10 columns");
    ai.push_back({c[0], to_i<uint64_t>(c[1]), to_i<int>(c[2]), to_d(c[3]), to_i<int>(c[4]), to_i<int64_t>(c[5]),
                  to_i<int64_t>(c[6]), to_d(c[7]), to_i<int>(c[8]), to_d(c[9])});
  }
  return summarize(urllc, ai, a_req, gamma);
}

}  // namespace coexist::experiments
