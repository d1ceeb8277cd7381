#include <algorithm>
#include <filesystem>
#include <fstream>

#include "coexist/config.hpp"
#include "doctest.h"

using namespace coexist;

TEST_CASE("empty file yields the defaults") {
  const ScenarioConfig c = parse_config_text("");
  CHECK(c == ScenarioConfig::defaults());
  CHECK(c.urllc.ul_survival_ms == 5.0);
  CHECK(c.urllc.dl_survival_ms == 5.0);
  CHECK(c.radio.bandwidth_mhz == 40.0);
  CHECK(c.radio.prbs == 106);
  CHECK(c.deployment.urllc_devices == 10);
  CHECK(c.mac.urllc_max_tx_ul == 3);
  CHECK(c.mac.urllc_max_tx_dl == 2);
  CHECK(c.mac.ai_max_tx_ul == 10);
  CHECK(c.rlc.am_max_tx == 8);
  CHECK(c.sim.duration_s == 100.0);
  CHECK(c.fl.model_bytes() == 2'000'000);
}

TEST_CASE("desk profile shortens the horizon") {
  CHECK(parse_config_text("", "desk").sim.duration_s == 20.0);
  CHECK(parse_config_text("[sim]\nprofile = desk\n").sim.duration_s == 20.0);
  CHECK(parse_config_text("[sim]\nprofile = desk\nduration_s = 3\n").sim.duration_s == 3.0);
}

TEST_CASE("eta above one is rejected") {
  CHECK_THROWS_WITH_AS(parse_config_text("[fl]\nN = 10\neta = 1.3\n"), doctest::Contains("fl.eta"), ConfigError);
}

TEST_CASE("inconsistent n and eta are rejected") {
  CHECK_THROWS_AS(parse_config_text("[fl]\nN = 60\nn = 30\neta = 0.4\n"), ConfigError);
  const ScenarioConfig ok = parse_config_text("[fl]\nN = 60\nn = 24\neta = 0.4\n");
  CHECK(ok.fl.n_required == 24);
}

TEST_CASE("n follows from eta and the reverse") {
  const ScenarioConfig a = parse_config_text("[fl]\nN = 60\neta = 0.4\n");
  CHECK(a.fl.n_required == 24);
  const ScenarioConfig b = parse_config_text("[fl]\nN = 50\nn = 30\n");
  CHECK(b.eta == doctest::Approx(0.6));
  CHECK(required_uploads(0.25, 10) == 3);
  CHECK(required_uploads(0.6, 50) == 30);
}

TEST_CASE("unknown and duplicate keys") {
  CHECK_THROWS_WITH_AS(parse_config_text("[fl]\nbogus = 1\n"), doctest::Contains("fl.bogus"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("fl.N = 3\nfl.N = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[fl]\nN = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[fl\n"), ConfigError);
}

TEST_CASE("dotted keys without a section") {
  const ScenarioConfig c = parse_config_text("fl.N = 30\nmac.harq_rtt_tti = 6\n");
  CHECK(c.fl.n_devices == 30);
  CHECK(c.mac.harq_rtt_tti == 6);
}

TEST_CASE("text round trip") {
  ScenarioConfig c = parse_config_text("[fl]\nN = 7\neta = 0.5\n[radio]\nshadowing_sigma_db = 2.5\n", "desk");
  const ScenarioConfig back = parse_config_text(c.to_text());
  CHECK(back == c);
  CHECK(back.hash_hex() == c.hash_hex());
  CHECK(back.fl.n_required == 4);
  ScenarioConfig d = c;
  d.radio.shadowing_sigma_db = 3.0;
  CHECK(d.hash_hex() != c.hash_hex());
}

TEST_CASE("every key appears in the canonical text") {
  const std::string text = ScenarioConfig::defaults().to_text();
  for (const std::string& k : config_keys()) {
    const std::string leaf = k.substr(k.find('.') + 1);
    CHECK_MESSAGE(text.find(leaf + " = ") != std::string::npos, k);
  }
}

TEST_CASE("range validation") {
  CHECK_THROWS_AS(parse_config_text("radio.prbs = 200\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("rlc.forced_pdu_loss = 1.0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("fl.learner = sgd\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sim.profile = huge\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::filesystem::path("/nonexistent/x.cfg")), ConfigError);
}

TEST_CASE("parse from file") {
  const auto path = std::filesystem::temp_directory_path() / "coexist_cfg_test.cfg";
  {
    std::ofstream(path) << "# scenario\n[deployment]\nurllc_devices = 4  # fewer\n";
  }
  CHECK(parse_config(path).deployment.urllc_devices == 4);
  std::filesystem::remove(path);
}
