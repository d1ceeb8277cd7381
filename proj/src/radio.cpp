// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coexist::radio {
namespace {

double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

double wrap_deg(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

}  // namespace

double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool HallDims::contains(const Position& p) const {
  return p.x >= 0.0 && p.x <= x && p.y >= 0.0 && p.y <= y && p.z >= 0.0 && p.z <= z;
}

void CellGeometry::validate() const {
  if (sector_azimuths_deg.empty()) throw std::invalid_argument("geometry: no sectors");
  for (size_t i = 0; i < sector_azimuths_deg.size(); ++i) {
    for (size_t j = i + 1; j < sector_azimuths_deg.size(); ++j) {
      if (std::abs(wrap_deg(sector_azimuths_deg[i] - sector_azimuths_deg[j])) < 1e-9) {
        throw std::invalid_argument("geometry: sector azimuths " + std::to_string(i) + " and " +
                                    std::to_string(j) + " coincide modulo 360");
      }
    }
  }
  if (!hall.contains(gnb)) throw std::invalid_argument("geometry: gNB outside hall");
}

double blockage_probability(double distance_m, const RadioParams& p) {
  return 1.0 - std::exp(-p.blocker_density_per_m2 * p.blocker_width_mean_m * distance_m);
}

LinkDraw draw_link(int device_id, double distance_m, const RadioParams& p, const RngFactory& rng) {
  RngStream s = rng.stream("link." + std::to_string(device_id));
  LinkDraw d;
  d.shadowing_db = s.normal(0.0, p.shadowing_sigma_db);
  d.blocked = s.bernoulli(blockage_probability(distance_m, p));
  return d;
}

double path_gain_db(const Position& a, const Position& b, const RadioParams& p, double shadowing_db,
                    bool blocked) {
  const double d = std::max(distance(a, b), 0.1);
  const double pl = p.pl0_db + 10.0 * p.pathloss_exponent * std::log10(d);
  return -pl - shadowing_db - (blocked ? p.blockage_loss_db : 0.0);
}

double sector_pattern_db(double offset_deg, const RadioParams& p) {
  const double th = wrap_deg(offset_deg) / p.beamwidth_3db_deg;
  return p.antenna_peak_dbi - std::min(12.0 * th * th, p.front_to_back_db);
}

double sector_pattern_db(const Position& gnb, double azimuth_deg, const Position& device,
                         const RadioParams& p) {
  const double bearing = std::atan2(device.y - gnb.y, device.x - gnb.x) * 180.0 / std::numbers::pi;
  return sector_pattern_db(bearing - azimuth_deg, p);
}

int assign_cell(const Position& device, const CellGeometry& geom, const RadioParams& p) {
  const double pg = path_gain_db(device, geom.gnb, p);
  int best = 0;
  double best_gain = -1e300;
  for (size_t s = 0; s < geom.sector_azimuths_deg.size(); ++s) {
    const double g = pg + sector_pattern_db(geom.gnb, geom.sector_azimuths_deg[s], device, p);
    if (g > best_gain + 1e-9) {
      best_gain = g;
      best = static_cast<int>(s);
    }
  }
  return best;
}

LinkState make_link_state(int device_id, const Position& device, const CellGeometry& geom,
                          const RadioParams& p, const LinkDraw& draw) {
  LinkState ls;
  ls.device_id = device_id;
  ls.blocked = draw.blocked;
  ls.shadowing_db = draw.shadowing_db;
  ls.path_gain_db = path_gain_db(device, geom.gnb, p, draw.shadowing_db, draw.blocked);
  ls.serving_cell = assign_cell(device, geom, p);
  ls.sector_gain_db.reserve(geom.sector_azimuths_deg.size());
  for (double az : geom.sector_azimuths_deg) {
    ls.sector_gain_db.push_back(ls.path_gain_db + sector_pattern_db(geom.gnb, az, device, p));
  }
  return ls;
}

int overlap(const PrbRange& a, const PrbRange& b) {
  return std::max(0, std::min(a.end(), b.end()) - std::max(a.start, b.start));
}

double noise_psd_dbm(const RadioParams& p) {
  return -174.0 + lin_to_db(12.0 * p.scs_khz * 1e3) + p.noise_figure_db;
}

double sinr_db(double signal_dbm, double noise_dbm, std::span<const double> interference_dbm) {
  double denom = db_to_lin(noise_dbm);
  for (double i : interference_dbm) denom += db_to_lin(i);
  return signal_dbm - lin_to_db(denom);
}

double sinr_db(double signal_psd_dbm, const PrbRange& alloc, double noise_psd_dbm,
               std::span<const Interferer> interferers) {
  const double n = static_cast<double>(alloc.count);
  double interference = 0.0;
  for (const Interferer& i : interferers) {
    const int ov = overlap(alloc, i.prbs);
    if (ov > 0) interference += db_to_lin(i.rx_psd_dbm) * ov;
  }
  return lin_to_db(db_to_lin(signal_psd_dbm) * n) - lin_to_db(db_to_lin(noise_psd_dbm) * n + interference);
}

const McsTable& default_mcs_table() {
  static const McsTable table = [] {
    constexpr std::array<double, 15> eff = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
                                            1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
                                            3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
    McsTable t{};
    for (int i = 0; i < 15; ++i) {
      t[i] = McsEntry{i + 1, eff[i], -7.0 + 27.0 * i / 14.0};
    }
    return t;
  }();
  return table;
}

double bler(double sinr, const McsEntry& mcs, double slope_db) {
  return 1.0 / (1.0 + std::exp((sinr - mcs.snr50_db) / slope_db));
}

const McsEntry& select_mcs(double sinr, double bler_target, const McsTable& table, double slope_db) {
  for (auto it = table.rbegin(); it != table.rend(); ++it) {
    if (bler(sinr, *it, slope_db) <= bler_target) return *it;
  }
  return table.front();
}

int64_t tb_capacity(int prb_count, const McsEntry& mcs, double overhead) {
  if (prb_count < 1) throw std::invalid_argument("tb_capacity: prb_count must be >= 1");
  constexpr double kEps = 1e-9;
  const double res = std::floor(prb_count * 12.0 * 14.0 * (1.0 - overhead) + kEps);
  return static_cast<int64_t>(std::floor(res * mcs.spectral_eff + kEps));
}

int prbs_for_bits(int64_t bits, const McsEntry& mcs, int max_prbs, double overhead) {
  const double per_prb = 168.0 * (1.0 - overhead) * mcs.spectral_eff;
  int guess = std::clamp(static_cast<int>(std::ceil(static_cast<double>(bits) / per_prb)), 1, max_prbs);
  while (guess > 1 && tb_capacity(guess - 1, mcs, overhead) >= bits) --guess;
  while (guess < max_prbs && tb_capacity(guess, mcs, overhead) < bits) ++guess;
  return guess;
}

bool decode(double sinr, const McsEntry& mcs, RngStream& rng, double slope_db) {
  return rng.uniform() >= bler(sinr, mcs, slope_db);
}

double ul_psd_dbm(double pathloss_db, const RadioParams& p) {
  const double max_psd = 10.0 * std::log10(p.ul_tx_power_w * 1000.0) - 10.0 * std::log10(p.prbs);
  if (!p.ul_power_control) return max_psd;
  return std::min(max_psd, p.ul_p0_dbm + p.ul_alpha * pathloss_db);
}

}  // namespace coexist::radio
