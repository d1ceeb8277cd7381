// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "coexist/rng.hpp"

namespace coexist {
namespace {

using C = ScenarioConfig;

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}
std::string fmt(int64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const std::string& v) { return v; }

struct BadValue {};

double parse_double(const std::string& s) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) throw BadValue{};
  return v;
}

template <typename T>
T parse_int(const std::string& s) {
  T v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    // Accept integral values written in float form, e.g. 5e5.
    const double d = parse_double(s);
    if (d != std::floor(d)) throw BadValue{};
    return static_cast<T>(d);
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw BadValue{};
}

void parse_into(double& dst, const std::string& s) { dst = parse_double(s); }
void parse_into(int& dst, const std::string& s) { dst = parse_int<int>(s); }
void parse_into(int64_t& dst, const std::string& s) { dst = parse_int<int64_t>(s); }
void parse_into(uint64_t& dst, const std::string& s) { dst = parse_int<uint64_t>(s); }
void parse_into(bool& dst, const std::string& s) { dst = parse_bool(s); }
void parse_into(std::string& dst, const std::string& s) { dst = s; }

struct Field {
  std::string key;
  std::function<std::string(const C&)> get;
  std::function<void(C&, const std::string&)> set;
};

#define COEXIST_FIELD(KEY, MEMBER)                                        \
  Field {                                                                 \
    KEY, [](const C& c) { return fmt(c.MEMBER); },                        \
        [](C& c, const std::string& v) { parse_into(c.MEMBER, v); }       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      COEXIST_FIELD("sim.profile", sim.profile),
      COEXIST_FIELD("sim.duration_s", sim.duration_s),
      COEXIST_FIELD("sim.seed", sim.seed),
      COEXIST_FIELD("sim.seeds", sim.seeds),
      COEXIST_FIELD("sim.check_invariants", sim.check_invariants),
      COEXIST_FIELD("sim.trace", sim.trace),

      COEXIST_FIELD("deployment.hall_x_m", deployment.hall_x_m),
      COEXIST_FIELD("deployment.hall_y_m", deployment.hall_y_m),
      COEXIST_FIELD("deployment.hall_z_m", deployment.hall_z_m),
      COEXIST_FIELD("deployment.gnb_height_m", deployment.gnb_height_m),
      COEXIST_FIELD("deployment.device_height_m", deployment.device_height_m),
      COEXIST_FIELD("deployment.sectors", deployment.sectors),
      COEXIST_FIELD("deployment.sector_offset_deg", deployment.sector_offset_deg),
      COEXIST_FIELD("deployment.urllc_devices", deployment.urllc_devices),

      COEXIST_FIELD("radio.carrier_ghz", radio.carrier_ghz),
      COEXIST_FIELD("radio.bandwidth_mhz", radio.bandwidth_mhz),
      COEXIST_FIELD("radio.prbs", radio.prbs),
      COEXIST_FIELD("radio.scs_khz", radio.scs_khz),
      COEXIST_FIELD("radio.ul_tx_power_w", radio.ul_tx_power_w),
      COEXIST_FIELD("radio.dl_tx_power_w", radio.dl_tx_power_w),
      COEXIST_FIELD("radio.ul_power_control", radio.ul_power_control),
      COEXIST_FIELD("radio.ul_p0_dbm", radio.ul_p0_dbm),
      COEXIST_FIELD("radio.ul_alpha", radio.ul_alpha),
      COEXIST_FIELD("radio.pl0_db", radio.pl0_db),
      COEXIST_FIELD("radio.pathloss_exponent", radio.pathloss_exponent),
      COEXIST_FIELD("radio.shadowing_sigma_db", radio.shadowing_sigma_db),
      COEXIST_FIELD("radio.blockage_loss_db", radio.blockage_loss_db),
      COEXIST_FIELD("radio.blocker_density_per_m2", radio.blocker_density_per_m2),
      COEXIST_FIELD("radio.blocker_width_mean_m", radio.blocker_width_mean_m),
      COEXIST_FIELD("radio.noise_figure_db", radio.noise_figure_db),
      COEXIST_FIELD("radio.antenna_peak_dbi", radio.antenna_peak_dbi),
      COEXIST_FIELD("radio.beamwidth_3db_deg", radio.beamwidth_3db_deg),
      COEXIST_FIELD("radio.front_to_back_db", radio.front_to_back_db),
      COEXIST_FIELD("radio.bler_slope_db", radio.bler_slope_db),
      COEXIST_FIELD("radio.overhead", radio.overhead),
      COEXIST_FIELD("radio.bler_override", bler_override),

      COEXIST_FIELD("mac.tti_ms", mac.tti_ms),
      COEXIST_FIELD("mac.harq_rtt_tti", mac.harq_rtt_tti),
      COEXIST_FIELD("mac.urllc_max_tx_ul", mac.urllc_max_tx_ul),
      COEXIST_FIELD("mac.urllc_max_tx_dl", mac.urllc_max_tx_dl),
      COEXIST_FIELD("mac.ai_max_tx_ul", mac.ai_max_tx_ul),
      COEXIST_FIELD("mac.ai_max_tx_dl", mac.ai_max_tx_dl),
      COEXIST_FIELD("mac.bler_target_urllc", mac.bler_target_urllc),
      COEXIST_FIELD("mac.bler_target_ai", mac.bler_target_ai),
      COEXIST_FIELD("mac.la_window_tti", mac.la_window_tti),

      COEXIST_FIELD("rlc.header_bytes", rlc.header_bytes),
      COEXIST_FIELD("rlc.am_max_tx", rlc.am_max_tx),
      COEXIST_FIELD("rlc.buffer_cap_bytes", rlc.buffer_cap_bytes),
      COEXIST_FIELD("rlc.forced_pdu_loss", rlc.forced_pdu_loss),

      COEXIST_FIELD("urllc.period_ms", urllc.period_ms),
      COEXIST_FIELD("urllc.ul_size_bytes", urllc.ul_size_bytes),
      COEXIST_FIELD("urllc.dl_size_bytes", urllc.dl_size_bytes),
      COEXIST_FIELD("urllc.ul_delay_bound_ms", urllc.ul_delay_bound_ms),
      COEXIST_FIELD("urllc.dl_delay_bound_ms", urllc.dl_delay_bound_ms),
      COEXIST_FIELD("urllc.ul_survival_ms", urllc.ul_survival_ms),
      COEXIST_FIELD("urllc.dl_survival_ms", urllc.dl_survival_ms),
      COEXIST_FIELD("urllc.random_phase", urllc.random_phase),

      COEXIST_FIELD("fl.N", fl.n_devices),
      COEXIST_FIELD("fl.n", fl.n_required),
      COEXIST_FIELD("fl.eta", eta),
      COEXIST_FIELD("fl.params", fl.params),
      COEXIST_FIELD("fl.bytes_per_param", fl.bytes_per_param),
      COEXIST_FIELD("fl.learner", learner),
      COEXIST_FIELD("fl.step_size", fl.step_size),
      COEXIST_FIELD("fl.local_steps", fl.local_steps),
      COEXIST_FIELD("fl.compute_c0_s", fl.compute_c0_s),
      COEXIST_FIELD("fl.compute_c1_s", fl.compute_c1_s),
      COEXIST_FIELD("fl.master_compute_s", fl.master_compute_s),
      COEXIST_FIELD("fl.dim", fl.dim),

      COEXIST_FIELD("metrics.a_req", metrics.a_req),
      COEXIST_FIELD("metrics.gamma", metrics.gamma),
  };
  return f;
}

#undef COEXIST_FIELD

const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError(std::string(key) + ": " + std::string(what));
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

int required_uploads(double eta, int n_devices) {
  return static_cast<int>(std::ceil(eta * n_devices - 1e-9));
}

ScenarioConfig ScenarioConfig::defaults(std::string_view profile) {
  ScenarioConfig c;
  c.sim.profile = std::string(profile);
  finalize(c);
  return c;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

void finalize(ScenarioConfig& c, const std::set<std::string>& explicit_keys) {
  auto given = [&](const char* k) { return explicit_keys.count(k) > 0; };

  require(c.sim.profile == "full" || c.sim.profile == "desk", "sim.profile", "must be 'full' or 'desk'");
  if (!given("sim.duration_s")) c.sim.duration_s = c.sim.profile == "desk" ? 20.0 : 100.0;
  require(c.sim.duration_s > 0, "sim.duration_s", "must be positive");
  require(c.sim.seeds >= 1, "sim.seeds", "must be >= 1");

  const auto& d = c.deployment;
  require(d.hall_x_m > 0 && d.hall_y_m > 0 && d.hall_z_m > 0, "deployment.hall_*", "dimensions must be positive");
  require(d.gnb_height_m >= 0 && d.gnb_height_m <= d.hall_z_m, "deployment.gnb_height_m", "must lie inside the hall");
  require(d.device_height_m >= 0 && d.device_height_m <= d.hall_z_m, "deployment.device_height_m",
          "must lie inside the hall");
  require(d.sectors >= 1 && d.sectors <= 12, "deployment.sectors", "must be in [1, 12]");
  require(d.urllc_devices >= 0, "deployment.urllc_devices", "must be >= 0");

  const auto& r = c.radio;
  require(r.prbs >= 1, "radio.prbs", "must be >= 1");
  require(r.scs_khz > 0, "radio.scs_khz", "must be positive");
  require(r.prbs * 12.0 * r.scs_khz * 1e-3 <= r.bandwidth_mhz + 1e-9, "radio.prbs",
          "PRBs x 12 x subcarrier spacing exceeds the bandwidth");
  require(r.ul_tx_power_w > 0 && r.dl_tx_power_w > 0, "radio.*_tx_power_w", "must be positive");
  require(r.pathloss_exponent > 0, "radio.pathloss_exponent", "must be positive");
  require(r.shadowing_sigma_db >= 0, "radio.shadowing_sigma_db", "must be >= 0");
  require(r.blockage_loss_db >= 0, "radio.blockage_loss_db", "must be >= 0");
  require(r.blocker_density_per_m2 >= 0, "radio.blocker_density_per_m2", "must be >= 0");
  require(r.beamwidth_3db_deg > 0, "radio.beamwidth_3db_deg", "must be positive");
  require(r.bler_slope_db > 0, "radio.bler_slope_db", "must be positive");
  require(r.overhead >= 0 && r.overhead < 1, "radio.overhead", "must be in [0, 1)");
  require(c.bler_override < 0 || is_probability(c.bler_override), "radio.bler_override",
          "must be negative (off) or a probability");

  const auto& m = c.mac;
  require(m.tti_ms > 0, "mac.tti_ms", "must be positive");
  require(m.harq_rtt_tti >= 1, "mac.harq_rtt_tti", "must be >= 1");
  require(m.la_window_tti >= 1, "mac.la_window_tti", "must be >= 1");
  require(m.urllc_max_tx_ul >= 1 && m.urllc_max_tx_dl >= 1 && m.ai_max_tx_ul >= 1 && m.ai_max_tx_dl >= 1,
          "mac.*_max_tx", "must be >= 1");
  require(m.bler_target_urllc > 0 && m.bler_target_urllc < 1, "mac.bler_target_urllc", "must be in (0, 1)");
  require(m.bler_target_ai > 0 && m.bler_target_ai < 1, "mac.bler_target_ai", "must be in (0, 1)");

  require(c.rlc.header_bytes >= 0, "rlc.header_bytes", "must be >= 0");
  require(c.rlc.am_max_tx >= 1, "rlc.am_max_tx", "must be >= 1");
  require(c.rlc.buffer_cap_bytes >= 0, "rlc.buffer_cap_bytes", "must be >= 0");
  require(c.rlc.forced_pdu_loss >= 0 && c.rlc.forced_pdu_loss < 1, "rlc.forced_pdu_loss", "must be in [0, 1)");

  const auto& u = c.urllc;
  require(u.period_ms > 0, "urllc.period_ms", "must be positive");
  require(u.ul_size_bytes >= 1 && u.dl_size_bytes >= 1, "urllc.*_size_bytes", "must be >= 1");
  require(u.ul_delay_bound_ms > 0 && u.dl_delay_bound_ms > 0, "urllc.*_delay_bound_ms", "must be positive");
  require(u.ul_survival_ms >= 0 && u.dl_survival_ms >= 0, "urllc.*_survival_ms", "must be >= 0");

  require(c.fl.n_devices >= 0, "fl.N", "must be >= 0");
  const bool has_n = given("fl.n");
  const bool has_eta = given("fl.eta");
  if (has_eta) require(c.eta > 0 && c.eta <= 1, "fl.eta", "must be in (0, 1]");
  if (c.fl.n_devices == 0) {
    c.fl.n_required = 0;
    if (!has_eta) c.eta = 1.0;
  } else if (has_n && has_eta) {
    require(c.fl.n_required == required_uploads(c.eta, c.fl.n_devices), "fl.n",
            "inconsistent with fl.eta (n must equal ceil(eta * N))");
  } else if (has_eta) {
    c.fl.n_required = required_uploads(c.eta, c.fl.n_devices);
  } else if (has_n) {
    require(c.fl.n_required >= 1 && c.fl.n_required <= c.fl.n_devices, "fl.n", "must satisfy 1 <= n <= N");
    c.eta = static_cast<double>(c.fl.n_required) / c.fl.n_devices;
  } else {
    c.fl.n_required = c.fl.n_devices;
    c.eta = 1.0;
  }
  require(c.learner == "gradient" || c.learner == "fedavg", "fl.learner", "must be 'gradient' or 'fedavg'");
  c.fl.mode = c.learner == "fedavg" ? fl::LearnerMode::kFedAvg : fl::LearnerMode::kGradient;
  try {
    c.fl.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  require(is_probability(c.metrics.a_req), "metrics.a_req", "must be a probability");
  require(is_probability(c.metrics.gamma), "metrics.gamma", "must be a probability");
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream os;
  os << "# coexist scenario configuration (resolved)\n";
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    os << f.key.substr(dot + 1) << " = " << f.get(*this) << "\n";
  }
  return os.str();
}

uint64_t ScenarioConfig::hash() const { return fnv1a64(to_text()); }

std::string ScenarioConfig::hash_hex() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash();
  return os.str();
}

ScenarioConfig parse_config_text(std::string_view text, std::string_view profile_override) {
  ScenarioConfig c;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    const Field* f = find_field(full);
    if (!f) throw ConfigError(full + ": unknown key (" + where + ")");
    if (!seen.insert(full).second) throw ConfigError(full + ": given twice (" + where + ")");
    try {
      f->set(c, value);
    } catch (const BadValue&) {
      throw ConfigError(full + ": invalid value '" + value + "' (" + where + ")");
    }
  }
  if (!profile_override.empty()) {
    c.sim.profile = std::string(profile_override);
    seen.insert("sim.profile");
  }
  finalize(c, seen);
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path, std::string_view profile_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), profile_override);
}

}  // namespace coexist
