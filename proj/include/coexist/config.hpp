// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coexist/fl.hpp"
#include "coexist/radio.hpp"

namespace coexist {

/// Schema violation; message carries the key path and line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  struct Sim {
    std::string profile = "full";  // full: 100 s, desk: 20 s
    double duration_s = 100.0;
    uint64_t seed = 1;
    int seeds = 10;
    bool check_invariants = false;
    bool trace = false;
  } sim;

  struct Deployment {
    double hall_x_m = 15.0;
    double hall_y_m = 15.0;
    double hall_z_m = 11.0;
    double gnb_height_m = 10.0;
    double device_height_m = 1.5;
    int sectors = 3;
    double sector_offset_deg = 0.0;
    int urllc_devices = 10;  // M
  } deployment;

  radio::RadioParams radio;
  double bler_override = -1.0;  // radio.bler_override; < 0 disables

  struct Mac {
    int harq_rtt_tti = 4;
    int urllc_max_tx_ul = 3;
    int urllc_max_tx_dl = 2;
    int ai_max_tx_ul = 10;
    int ai_max_tx_dl = 10;
    double bler_target_urllc = 0.01;
    double bler_target_ai = 0.1;
    double tti_ms = 0.5;
    int la_window_tti = 10;  // interference memory of link adaptation
  } mac;

  struct Rlc {
    int header_bytes = 5;
    int am_max_tx = 8;
    int64_t buffer_cap_bytes = 0;
    double forced_pdu_loss = 0.0;  // AM bearers only; test knob
  } rlc;

  struct Urllc {
    double period_ms = 5.0;
    int64_t ul_size_bytes = 64;
    int64_t dl_size_bytes = 80;
    double ul_delay_bound_ms = 6.0;
    double dl_delay_bound_ms = 2.0;
    double ul_survival_ms = 5.0;
    double dl_survival_ms = 5.0;
    bool random_phase = true;
  } urllc;

  fl::FlConfig fl;
  double eta = 1.0;
  std::string learner = "gradient";

  struct Metrics {
    double a_req = 0.95;
    double gamma = 0.01;
  } metrics;

  /// Default key tree; `profile` selects the horizon.
  static ScenarioConfig defaults(std::string_view profile = "full");

  /// Canonical text form; parse_config_text(to_text()) reproduces *this.
  std::string to_text() const;
  uint64_t hash() const;
  std::string hash_hex() const;

  bool operator==(const ScenarioConfig& o) const { return to_text() == o.to_text(); }
};

/// n = ceil(eta * N) for a non-integral product.
int required_uploads(double eta, int n_devices);

/// Parses `[section]` headers and `key = value` lines (`#` comments).
/// Dotted keys may also be written in full without a section header.
ScenarioConfig parse_config_text(std::string_view text, std::string_view profile_override = {});
ScenarioConfig parse_config(const std::filesystem::path& path, std::string_view profile_override = {});

/// Re-resolves n/eta and validates cross-key constraints.
void finalize(ScenarioConfig& cfg, const std::set<std::string>& explicit_keys = {});

/// Every recognised key, in canonical order.
std::vector<std::string> config_keys();

}  // namespace coexist
