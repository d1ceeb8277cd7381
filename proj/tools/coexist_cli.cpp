// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0
//
// coexist run | sweep | report

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "coexist/config.hpp"
#include "coexist/experiments.hpp"

namespace ex = coexist::experiments;

namespace {

coexist::ScenarioConfig load(const std::string& path, const std::string& profile) {
  if (path.empty()) return coexist::parse_config_text("", profile);
  return coexist::parse_config(path, profile);
}

// "key=v1,v2,..." -> key and values.
std::pair<std::string, std::vector<std::string>> split_assignment(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    throw CLI::ValidationError(flag, "expected <key>=<value>[,<value>...], got '" + s + "'");
  }
  std::vector<std::string> values;
  std::stringstream ss(s.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) values.push_back(v);
  return {s.substr(0, eq), values};
}

double to_double(const std::string& s, const char* flag) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag, "not a number: '" + s + "'");
}

int to_int(const std::string& s, const char* flag) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag, "not an integer: '" + s + "'");
}

void finish(const std::vector<coexist::RunResult>& results, const std::vector<ex::RunSpec>& specs,
            const coexist::ScenarioConfig& base, const std::string& out, double seconds) {
  ex::emit_csv(results, specs, base, out);
  const auto points = ex::summarize(ex::urllc_rows(results), ex::ai_rows(results), base.metrics.a_req,
                                    base.metrics.gamma);
  std::cout << ex::format_summary(points);
  uint64_t priority = 0;
  uint64_t invariants = 0;
  for (const auto& r : results) {
    priority += r.diag.priority_violations;
    invariants += r.diag.invariant_failures.size();
  }
  std::cout << results.size() << " run(s) in " << seconds << " s; priority violations " << priority
            << ", invariant failures " << invariants << "; outputs in " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"URLLC and federated-learning coexistence simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string profile;
  std::string out;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "one simulation");
  uint64_t seed = 0;
  bool seed_given = false;
  run->add_option("--config", config, "scenario file (defaults when omitted)");
  run->add_option("--seed", seed, "RNG seed (default sim.seed)")->each([&](const std::string&) { seed_given = true; });
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--profile", profile, "full | desk")->check(CLI::IsMember({"full", "desk"}));

  auto* sweep = app.add_subcommand("sweep", "Eval1 / Eval2 sweep");
  std::string mode;
  std::string fixed;
  std::string vary;
  int seeds = 0;
  sweep->add_option("--config", config, "scenario file (defaults when omitted)");
  sweep->add_option("--mode", mode, "eval1 | eval2")->required()->check(CLI::IsMember({"eval1", "eval2"}));
  sweep->add_option("--fixed", fixed, "N=<int> for eval1, n=<int> for eval2")->required();
  sweep->add_option("--vary", vary, "eta=<list> for eval1, N=<list> for eval2")->required();
  sweep->add_option("--seeds", seeds, "seeds per point (default sim.seeds)")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output directory")->required();
  sweep->add_option("--profile", profile, "full | desk")->check(CLI::IsMember({"full", "desk"}));
  sweep->add_option("--threads", threads, "parallel runs (0: all cores)");

  auto* report = app.add_subcommand("report", "summarise a previous output directory");
  std::string in;
  report->add_option("--in", in, "directory holding kpi_urllc.csv and kpi_ai.csv")->required()->check(
      CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    if (*run) {
      const coexist::ScenarioConfig cfg = load(config, profile);
      const uint64_t s = seed_given ? seed : cfg.sim.seed;
      const std::vector<ex::RunSpec> specs{{"run_s" + std::to_string(s), cfg, s}};
      const auto results = ex::execute(specs, 1);
      for (const auto& msg : results.front().diag.invariant_failures) std::cerr << "invariant: " << msg << "\n";
      finish(results, specs, cfg, out, elapsed());
      return results.front().diag.invariant_failures.empty() ? 0 : 3;
    }

    if (*sweep) {
      const coexist::ScenarioConfig cfg = load(config, profile);
      const int n_seeds = seeds > 0 ? seeds : cfg.sim.seeds;
      const auto [fkey, fvals] = split_assignment(fixed, "--fixed");
      const auto [vkey, vvals] = split_assignment(vary, "--vary");
      if (fvals.size() != 1) throw CLI::ValidationError("--fixed", "exactly one value expected");
      const int fixed_value = to_int(fvals.front(), "--fixed");
      std::vector<ex::RunSpec> specs;
      if (mode == "eval1") {
        if (fkey != "N") throw CLI::ValidationError("--fixed", "eval1 fixes N");
        if (vkey != "eta") throw CLI::ValidationError("--vary", "eval1 varies eta");
        std::vector<double> etas;
        for (const auto& v : vvals) etas.push_back(to_double(v, "--vary"));
        specs = ex::plan_eval1(cfg, fixed_value, etas, n_seeds);
      } else {
        if (fkey != "n") throw CLI::ValidationError("--fixed", "eval2 fixes n");
        if (vkey != "N") throw CLI::ValidationError("--vary", "eval2 varies N");
        std::vector<int> ns;
        for (const auto& v : vvals) ns.push_back(to_int(v, "--vary"));
        specs = ex::plan_eval2(cfg, fixed_value, ns, n_seeds);
      }
      const auto results = ex::execute(specs, threads);
      finish(results, specs, cfg, out, elapsed());
      return 0;
    }

    if (*report) {
      double a_req = 0.95;
      double gamma = 0.01;
      const std::filesystem::path echo = std::filesystem::path(in) / "config_echo.cfg";
      if (std::filesystem::exists(echo)) {
        const auto cfg = coexist::parse_config(echo);
        a_req = cfg.metrics.a_req;
        gamma = cfg.metrics.gamma;
      }
      std::cout << ex::format_summary(ex::report(in, a_req, gamma));
      return 0;
    }
  } catch (const coexist::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
