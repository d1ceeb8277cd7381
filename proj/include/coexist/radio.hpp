// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "coexist/rng.hpp"

namespace coexist::radio {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Position& a, const Position& b);

struct HallDims {
  double x = 15.0;
  double y = 15.0;
  double z = 11.0;

  bool contains(const Position& p) const;
};

/// Channel and antenna constants. Path loss is log-distance with a 1 m
/// intercept taken from the indoor-factory LOS form at the carrier.
struct RadioParams {
  double carrier_ghz = 2.6;
  double pl0_db = 31.84 + 19.0 * 0.41497334797081797;  // 31.84 + 19 log10(2.6)
  double pathloss_exponent = 2.15;
  double shadowing_sigma_db = 4.0;
  double blockage_loss_db = 15.0;
  double blocker_density_per_m2 = 0.15;
  double blocker_width_mean_m = 1.25;
  double noise_figure_db = 7.0;
  double antenna_peak_dbi = 14.0;
  double beamwidth_3db_deg = 70.0;
  double front_to_back_db = 20.0;
  double bler_slope_db = 0.5;
  double overhead = 0.14;
  double bandwidth_mhz = 40.0;
  int prbs = 106;
  double scs_khz = 30.0;
  double ul_tx_power_w = 0.2;
  double dl_tx_power_w = 0.5;
  // Open-loop fractional UL power control per PRB: min(Pmax/prbs, P0 + alpha * PL).
  bool ul_power_control = false;
  double ul_p0_dbm = -70.0;
  double ul_alpha = 0.8;
};

/// UL transmit power per PRB in dBm for a device whose coupling loss to its
/// serving sector is `pathloss_db` (antenna gain included).
double ul_psd_dbm(double pathloss_db, const RadioParams& p);

struct CellGeometry {
  Position gnb{7.5, 7.5, 10.0};
  std::vector<double> sector_azimuths_deg{0.0, 120.0, 240.0};
  double device_height_m = 1.5;
  HallDims hall;

  /// Throws std::invalid_argument when azimuths repeat modulo 360 or the
  /// gNB sits outside the hall.
  void validate() const;
};

/// Per-device radio condition toward the (single) gNB site.
struct LinkState {
  int device_id = 0;
  int serving_cell = 0;
  double path_gain_db = 0.0;    // includes shadowing and blockage, excludes antenna
  bool blocked = false;
  double shadowing_db = 0.0;
  std::vector<double> sector_gain_db;  // path gain + sector pattern, per sector
};

/// Link-level realisation drawn once per (seed, device) and then frozen.
struct LinkDraw {
  double shadowing_db = 0.0;
  bool blocked = false;
};

double blockage_probability(double distance_m, const RadioParams& p);

/// Draws shadowing and blockage from the stream "link.<device_id>".
LinkDraw draw_link(int device_id, double distance_m, const RadioParams& p, const RngFactory& rng);

/// Path gain in dB (negative). Distance below 0.1 m is clamped.
double path_gain_db(const Position& a, const Position& b, const RadioParams& p,
                    double shadowing_db = 0.0, bool blocked = false);

/// Parabolic horizontal sector pattern, dBi.
double sector_pattern_db(double offset_deg, const RadioParams& p);
double sector_pattern_db(const Position& gnb, double azimuth_deg, const Position& device,
                         const RadioParams& p);

/// argmax over sectors of path gain + pattern; ties go to the lowest index.
int assign_cell(const Position& device, const CellGeometry& geom, const RadioParams& p);

LinkState make_link_state(int device_id, const Position& device, const CellGeometry& geom,
                          const RadioParams& p, const LinkDraw& draw);

// ---------------------------------------------------------------------------
// SINR

/// Contiguous PRB range [start, start + count).
struct PrbRange {
  int start = 0;
  int count = 0;

  int end() const { return start + count; }
};

int overlap(const PrbRange& a, const PrbRange& b);

struct Interferer {
  PrbRange prbs;
  double rx_psd_dbm = 0.0;  // received power per PRB at the victim receiver
};

double noise_psd_dbm(const RadioParams& p);

/// S/(N0+I) in dB for a plain power budget.
double sinr_db(double signal_dbm, double noise_dbm, std::span<const double> interference_dbm);

/// Allocation-aware SINR: signal and noise scale with the allocated PRB count,
/// each interferer contributes its per-PRB power times the PRB overlap.
double sinr_db(double signal_psd_dbm, const PrbRange& alloc, double noise_psd_dbm,
               std::span<const Interferer> interferers);

// ---------------------------------------------------------------------------
// Link adaptation

struct McsEntry {
  int index = 1;
  double spectral_eff = 0.0;  // bits per resource element
  double snr50_db = 0.0;      // SINR where block error rate = 0.5
};

using McsTable = std::array<McsEntry, 15>;

/// CQI-shaped efficiencies with snr50 linearly spaced over [-7, 20] dB.
const McsTable& default_mcs_table();

double bler(double sinr_db, const McsEntry& mcs, double slope_db = 0.5);

/// Highest entry whose predicted BLER meets the target, else index 1.
const McsEntry& select_mcs(double sinr_db, double bler_target, const McsTable& table = default_mcs_table(),
                           double slope_db = 0.5);

/// Transport block size in bits; throws std::invalid_argument for prb_count < 1.
int64_t tb_capacity(int prb_count, const McsEntry& mcs, double overhead = 0.14);

/// Fewest PRBs whose capacity covers `bits`, capped at max_prbs.
int prbs_for_bits(int64_t bits, const McsEntry& mcs, int max_prbs, double overhead = 0.14);

/// Bernoulli(1 - bler) draw.
bool decode(double sinr_db, const McsEntry& mcs, RngStream& rng, double slope_db = 0.5);

}  // namespace coexist::radio
