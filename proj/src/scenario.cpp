// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

#include "coexist/engine.hpp"
#include "coexist/mac.hpp"
#include "coexist/radio.hpp"
#include "coexist/rng.hpp"

namespace coexist {
namespace {

constexpr Direction kDirs[] = {Direction::kUl, Direction::kDl};

double watts_to_dbm(double w) { return 10.0 * std::log10(w * 1000.0); }
double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

struct Device {
  int id = 0;
  bool is_ai = false;
  int fl_index = -1;
  radio::Position pos;
  radio::LinkState link;
  std::unique_ptr<rlc::RlcEntity> rlc[2];
  std::unique_ptr<urllc::FlowMonitor> monitor[2];
  std::optional<RngStream> decode_rng[2];
  std::optional<RngStream> loss_rng[2];
  int64_t last_delivered[2] = {-1, -1};
  double ul_psd_dbm = 0.0;
};

struct TxRecord {
  int cell = 0;
  Direction dir = Direction::kUl;
  uint64_t harq_id = 0;
  int device = 0;
  Bearer bearer = Bearer::kUrllc;
  bool success = false;
  std::vector<rlc::RlcPdu> pdus;
  std::vector<uint8_t> pdu_lost;
};

class Simulation final : public fl::FlTransport {
 public:
  Simulation(const ScenarioConfig& cfg, uint64_t seed)
      : cfg_(cfg), seed_(seed), rng_(seed), horizon_(SimTime::from_seconds(cfg.sim.duration_s)),
        tti_(SimTime::from_seconds(cfg.mac.tti_ms * 1e-3)) {
    geom_.hall = {cfg.deployment.hall_x_m, cfg.deployment.hall_y_m, cfg.deployment.hall_z_m};
    geom_.gnb = {cfg.deployment.hall_x_m / 2, cfg.deployment.hall_y_m / 2, cfg.deployment.gnb_height_m};
    geom_.device_height_m = cfg.deployment.device_height_m;
    geom_.sector_azimuths_deg.clear();
    for (int s = 0; s < cfg.deployment.sectors; ++s) {
      geom_.sector_azimuths_deg.push_back(cfg.deployment.sector_offset_deg + 360.0 * s / cfg.deployment.sectors);
    }
    geom_.validate();
    noise_psd_dbm_ = radio::noise_psd_dbm(cfg.radio);
    psd_dbm_[index(Direction::kUl)] = watts_to_dbm(cfg.radio.ul_tx_power_w) - lin_to_db(cfg.radio.prbs);
    psd_dbm_[index(Direction::kDl)] = watts_to_dbm(cfg.radio.dl_tx_power_w) - lin_to_db(cfg.radio.prbs);

    const int cells = cfg.deployment.sectors;
    for (int c = 0; c < cells; ++c) {
      for (Direction d : kDirs) {
        mac::MacParams mp;
        mp.prbs = cfg.radio.prbs;
        mp.overhead = cfg.radio.overhead;
        mp.bler_slope_db = cfg.radio.bler_slope_db;
        mp.bler_target_urllc = cfg.mac.bler_target_urllc;
        mp.bler_target_ai = cfg.mac.bler_target_ai;
        mp.harq_rtt_tti = cfg.mac.harq_rtt_tti;
        mp.max_tx_urllc = d == Direction::kUl ? cfg.mac.urllc_max_tx_ul : cfg.mac.urllc_max_tx_dl;
        mp.max_tx_ai = d == Direction::kUl ? cfg.mac.ai_max_tx_ul : cfg.mac.ai_max_tx_dl;
        sched_.emplace_back(c, d, mp);
      }
    }
    cell_devices_.resize(cells);
    window_ = cfg.mac.la_window_tti;
    dl_active_hist_.assign(static_cast<size_t>(cells) * window_, 0);
    ul_peak_hist_.assign(static_cast<size_t>(cells) * window_, 0.0);
    dl_occupancy_hist_.assign(static_cast<size_t>(cells) * window_, 0.0);
    ul_mean_hist_.assign(static_cast<size_t>(cells) * window_, 0.0);
    place_devices();
  }

  RunResult run(const std::string& run_id);

  void send_model(int i, int64_t bytes, uint64_t tag) override {
    ai(i).rlc[index(Direction::kDl)]->enqueue_sdu(bytes, engine_.now(), tag);
  }
  void send_upload(int i, int64_t bytes, uint64_t tag) override {
    ai(i).rlc[index(Direction::kUl)]->enqueue_sdu(bytes, engine_.now(), tag);
  }
  void cancel(int i) override {
    Device& d = ai(i);
    for (Direction dir : kDirs) {
      d.rlc[index(dir)]->flush();
      sched(d.link.serving_cell, dir).flush(d.id, Bearer::kAi);
    }
  }

 private:
  Device& ai(int i) { return devices_[ai_offset_ + i]; }
  mac::CellScheduler& sched(int cell, Direction d) { return sched_[cell * 2 + index(d)]; }

  void place_devices();
  void make_entities(Device& dev);
  void start_urllc_flow(Device& dev, Direction dir, SimTime phase);
  void on_packet(Device& dev, Direction dir);
  void on_tti(int64_t tti);
  void on_feedback(int64_t fb_tti, const std::vector<TxRecord>& records);
  double tx_psd(const Device& d, Direction dir) const {
    return dir == Direction::kUl ? d.ul_psd_dbm : psd_dbm_[index(Direction::kDl)];
  }
  double sinr_estimate(const Device& dev, Bearer bearer, Direction dir) const;
  void check_invariants();

  ScenarioConfig cfg_;
  uint64_t seed_;
  RngFactory rng_;
  SimTime horizon_;
  SimTime tti_;
  Engine engine_;
  radio::CellGeometry geom_;
  double noise_psd_dbm_ = 0.0;
  double psd_dbm_[2] = {0.0, 0.0};

  std::vector<Device> devices_;
  int ai_offset_ = 0;
  std::vector<std::vector<int>> cell_devices_;
  std::vector<mac::CellScheduler> sched_;
  // Link adaptation memory, ring buffers of `window_` TTIs per cell.
  int window_ = 1;
  std::vector<uint8_t> dl_active_hist_;  // cell transmitted on DL
  std::vector<double> ul_peak_hist_;     // worst-PRB UL interference seen by the cell, mW
  // Band averages for AI link adaptation.
  std::vector<double> dl_occupancy_hist_;  // fraction of PRBs used per cell
  std::vector<double> ul_mean_hist_;       // mW per PRB per cell
  std::vector<TxRecord> decoded_last_tti_;
  std::unique_ptr<fl::FlOrchestrator> fl_;

  RunResult result_;
  uint64_t prb_used_[2] = {0, 0};
  uint64_t prb_used_ai_[2] = {0, 0};
};

void Simulation::place_devices() {
  const int m = cfg_.deployment.urllc_devices;
  const int n = cfg_.fl.n_devices;
  RngStream urllc_place = rng_.stream("placement.urllc");
  RngStream ai_place = rng_.stream("placement.ai");
  devices_.resize(m + n);
  ai_offset_ = m;
  for (int id = 0; id < m + n; ++id) {
    Device& d = devices_[id];
    d.id = id;
    d.is_ai = id >= m;
    d.fl_index = d.is_ai ? id - m : -1;
    RngStream& s = d.is_ai ? ai_place : urllc_place;
    d.pos.x = s.uniform(0.0, geom_.hall.x);
    d.pos.y = s.uniform(0.0, geom_.hall.y);
    d.pos.z = geom_.device_height_m;
    const radio::LinkDraw draw = radio::draw_link(id, radio::distance(d.pos, geom_.gnb), cfg_.radio, rng_);
    d.link = radio::make_link_state(id, d.pos, geom_, cfg_.radio, draw);
    cell_devices_[d.link.serving_cell].push_back(id);
    d.ul_psd_dbm = radio::ul_psd_dbm(-d.link.sector_gain_db[d.link.serving_cell], cfg_.radio);
    for (Direction dir : kDirs) {
      const std::string suffix = std::to_string(id) + "." + std::string(to_string(dir));
      d.decode_rng[index(dir)].emplace(rng_.stream("decode." + suffix));
      d.loss_rng[index(dir)].emplace(rng_.stream("rlc-loss." + suffix));
    }
    make_entities(d);
  }
}

void Simulation::make_entities(Device& dev) {
  rlc::RlcConfig rc;
  rc.mode = dev.is_ai ? rlc::Mode::kAm : rlc::Mode::kUm;
  rc.header_bytes = cfg_.rlc.header_bytes;
  rc.am_max_tx = cfg_.rlc.am_max_tx;
  rc.buffer_cap_bytes = cfg_.rlc.buffer_cap_bytes;
  const Bearer bearer = dev.is_ai ? Bearer::kAi : Bearer::kUrllc;
  for (Direction dir : kDirs) {
    auto entity = std::make_unique<rlc::RlcEntity>(bearer, rc);
    Device* d = &dev;
    const int di = index(dir);
    if (dev.is_ai) {
      entity->on_deliver([this, d, dir, di](const rlc::RlcSdu& sdu, SimTime t) {
        const auto id = static_cast<int64_t>(sdu.sdu_id);
        if (id <= d->last_delivered[di]) {
          (id == d->last_delivered[di] ? result_.diag.ai_duplicate_deliveries
           : dir == Direction::kDl     ? result_.diag.ai_dl_out_of_order
                                       : result_.diag.ai_ul_out_of_order)++;
        }
        d->last_delivered[di] = std::max(d->last_delivered[di], id);
        if (dir == Direction::kDl) {
          fl_->on_model_delivered(d->fl_index, sdu.tag, t);
        } else {
          fl_->on_upload_delivered(d->fl_index, sdu.tag, t);
        }
      });
      entity->on_fail([this, d, dir](const rlc::RlcSdu& sdu, SimTime) {
        if (dir == Direction::kDl) {
          fl_->on_model_failed(d->fl_index, sdu.tag);
        } else {
          fl_->on_upload_failed(d->fl_index, sdu.tag);
        }
      });
    } else {
      entity->on_deliver([d, di](const rlc::RlcSdu& sdu, SimTime t) { d->monitor[di]->on_delivered(sdu.tag, t); });
    }
    dev.rlc[di] = std::move(entity);
  }
  if (!dev.is_ai) {
    const auto& u = cfg_.urllc;
    urllc::UrllcFlowCfg ul = urllc::default_ul_flow();
    ul.period = SimTime::from_seconds(u.period_ms * 1e-3);
    ul.size_bytes = u.ul_size_bytes;
    ul.delay_bound = SimTime::from_seconds(u.ul_delay_bound_ms * 1e-3);
    ul.survival_time = SimTime::from_seconds(u.ul_survival_ms * 1e-3);
    urllc::UrllcFlowCfg dl = urllc::default_dl_flow();
    dl.period = ul.period;
    dl.size_bytes = u.dl_size_bytes;
    dl.delay_bound = SimTime::from_seconds(u.dl_delay_bound_ms * 1e-3);
    dl.survival_time = SimTime::from_seconds(u.dl_survival_ms * 1e-3);
    dev.monitor[index(Direction::kUl)] = std::make_unique<urllc::FlowMonitor>(dev.id, ul);
    dev.monitor[index(Direction::kDl)] = std::make_unique<urllc::FlowMonitor>(dev.id, dl);
  }
}

void Simulation::start_urllc_flow(Device& dev, Direction dir, SimTime phase) {
  if (phase >= horizon_) return;
  engine_.schedule(phase, EventKind::kPacketArrival, [this, &dev, dir](Engine&) { on_packet(dev, dir); });
}

void Simulation::on_packet(Device& dev, Direction dir) {
  const int di = index(dir);
  const SimTime now = engine_.now();
  urllc::FlowMonitor& mon = *dev.monitor[di];
  const uint64_t idx = mon.on_generated(now);
  dev.rlc[di]->enqueue_sdu(dir == Direction::kUl ? cfg_.urllc.ul_size_bytes : cfg_.urllc.dl_size_bytes, now, idx);
  const SimTime deadline = mon.packets()[idx].deadline;
  if (deadline <= horizon_) {
    engine_.schedule(deadline, EventKind::kMetricSample, [&mon, idx](Engine&) { mon.on_deadline(idx); });
  }
  const SimTime next = now + SimTime::from_seconds(cfg_.urllc.period_ms * 1e-3);
  if (next < horizon_) {
    engine_.schedule(next, EventKind::kPacketArrival, [this, &dev, dir](Engine&) { on_packet(dev, dir); });
  }
}

double Simulation::sinr_estimate(const Device& dev, Bearer bearer, Direction dir) const {
  // URLLC: worst-PRB interference over the last window_ TTIs. Allocations all
  // start at PRB 0, so the worst PRB sees every active neighbour.
  // AI: worst band-average interference over the same window. A neighbour
  // left with HARQ retransmissions only is active one TTI in harq_rtt.
  const int c = dev.link.serving_cell;
  const auto w = static_cast<size_t>(window_);
  const bool urllc = bearer == Bearer::kUrllc;
  const double signal = db_to_lin(tx_psd(dev, dir) + dev.link.sector_gain_db[c]);
  double interference = 0.0;
  if (dir == Direction::kDl) {
    const int cells = static_cast<int>(cell_devices_.size());
    if (urllc) {
      for (int o = 0; o < cells; ++o) {
        if (o == c) continue;
        const auto* h = &dl_active_hist_[o * w];
        if (std::any_of(h, h + w, [](uint8_t a) { return a != 0; })) {
          interference += db_to_lin(psd_dbm_[index(dir)] + dev.link.sector_gain_db[o]);
        }
      }
    } else {
      for (size_t slot = 0; slot < w; ++slot) {
        double sum = 0.0;
        for (int o = 0; o < cells; ++o) {
          if (o == c) continue;
          sum += dl_occupancy_hist_[o * w + slot] * db_to_lin(psd_dbm_[index(dir)] + dev.link.sector_gain_db[o]);
        }
        interference = std::max(interference, sum);
      }
    }
  } else if (urllc) {
    const auto* h = &ul_peak_hist_[c * w];
    interference = *std::max_element(h, h + w);
  } else {
    const auto* h = &ul_mean_hist_[c * w];
    interference = *std::max_element(h, h + w);
  }
  return lin_to_db(signal / (db_to_lin(noise_psd_dbm_) + interference));
}

void Simulation::on_tti(int64_t tti) {
  const SimTime now = engine_.now();

  // Transport blocks decoded during the previous TTI reach the receiver now.
  std::vector<TxRecord> decoded = std::move(decoded_last_tti_);
  decoded_last_tti_.clear();
  for (const TxRecord& rec : decoded) {
    if (!rec.success) continue;
    rlc::RlcEntity& entity = *devices_[rec.device].rlc[index(rec.dir)];
    for (size_t j = 0; j < rec.pdus.size(); ++j) {
      if (!rec.pdu_lost[j]) entity.reassemble(rec.pdus[j], now);
    }
  }

  // The boundary TTI only hands over what was decoded before the horizon.
  if (now >= horizon_) return;
  ++result_.diag.ttis;

  const int cells = static_cast<int>(cell_devices_.size());
  std::vector<mac::TtiAllocation> allocs;
  allocs.reserve(cells * 2);
  for (int c = 0; c < cells; ++c) {
    for (Direction dir : kDirs) {
      std::vector<mac::SchedRequest> reqs;
      for (int id : cell_devices_[c]) {
        const Device& d = devices_[id];
        const rlc::RlcEntity& e = *d.rlc[index(dir)];
        if (!e.has_data()) continue;
        reqs.push_back({id, e.bearer(), dir, e.queued_bytes_with_headers(), sinr_estimate(d, e.bearer(), dir)});
      }
      mac::CellScheduler& s = sched(c, dir);
      mac::TtiAllocation alloc = s.schedule_tti(tti, reqs);
      // Fill new transport blocks from RLC; drop grants too small to carry a PDU.
      std::vector<mac::Grant> kept;
      for (const mac::Grant& g : alloc.grants) {
        if (g.new_data) {
          mac::HarqProcess& p = s.process(g.harq_id);
          rlc::RlcEntity& e = *devices_[g.device_id].rlc[index(dir)];
          int64_t budget = g.tb_bits / 8;
          while (auto pdu = e.next_pdu(budget)) {
            budget -= pdu->length + e.config().header_bytes;
            p.payload.push_back(*pdu);
          }
          if (p.payload.empty()) {
            s.discard(g.harq_id);
            continue;
          }
        }
        kept.push_back(g);
      }
      alloc.grants = std::move(kept);
      if (!mac::check_strict_priority(alloc, reqs, cfg_.radio.prbs).empty()) ++result_.diag.priority_violations;
      if (!mac::check_prb_budget(alloc, cfg_.radio.prbs).empty()) ++result_.diag.prb_violations;
      allocs.push_back(std::move(alloc));
    }
  }

  // Interference, decoding.
  std::vector<TxRecord> records;
  std::vector<radio::Interferer> interferers;
  for (const mac::TtiAllocation& a : allocs) {
    const int di = index(a.direction);
    for (const mac::Grant& g : a.grants) {
      Device& dev = devices_[g.device_id];
      const double signal_psd = tx_psd(dev, a.direction) + dev.link.sector_gain_db[a.cell];
      interferers.clear();
      for (const mac::TtiAllocation& o : allocs) {
        if (o.direction != a.direction || o.cell == a.cell) continue;
        for (const mac::Grant& og : o.grants) {
          if (radio::overlap(og.prbs, g.prbs) == 0) continue;
          const double rx = a.direction == Direction::kDl
                                ? psd_dbm_[di] + dev.link.sector_gain_db[o.cell]
                                : devices_[og.device_id].ul_psd_dbm + devices_[og.device_id].link.sector_gain_db[a.cell];
          interferers.push_back({og.prbs, rx});
        }
      }
      const double sinr = radio::sinr_db(signal_psd, g.prbs, noise_psd_dbm_, interferers);
      RngStream& rng = *dev.decode_rng[di];
      const bool ok = cfg_.bler_override >= 0.0 ? rng.uniform() >= cfg_.bler_override
                                                : radio::decode(sinr, g.mcs, rng, cfg_.radio.bler_slope_db);
      TxRecord rec;
      rec.cell = a.cell;
      rec.dir = a.direction;
      rec.harq_id = g.harq_id;
      rec.device = g.device_id;
      rec.bearer = g.bearer;
      rec.success = ok;
      rec.pdus = sched(a.cell, a.direction).process(g.harq_id).payload;
      rec.pdu_lost.assign(rec.pdus.size(), 0);
      if (ok && g.bearer == Bearer::kAi && cfg_.rlc.forced_pdu_loss > 0.0) {
        for (auto& lost : rec.pdu_lost) lost = dev.loss_rng[di]->bernoulli(cfg_.rlc.forced_pdu_loss);
      }
      if (g.bearer == Bearer::kUrllc) {
        ++result_.diag.tb_urllc;
        result_.diag.tb_urllc_failed += !ok;
      } else {
        ++result_.diag.tb_ai;
        result_.diag.tb_ai_failed += !ok;
      }
      if (cfg_.sim.trace) {
        result_.allocation_trace.push_back({tti, a.cell, a.direction, g.device_id, g.bearer, g.prbs.start,
                                            g.prbs.count, g.mcs.index, g.tb_bits, g.new_data, ok, sinr});
      }
      records.push_back(std::move(rec));
    }
  }

  // Measurements feeding link adaptation.
  const size_t slot = static_cast<size_t>(tti % window_);
  std::vector<double> ul_prb(static_cast<size_t>(cells) * cfg_.radio.prbs, 0.0);
  for (const mac::TtiAllocation& a : allocs) {
    const int di = index(a.direction);
    const int used = a.used_prbs();
    int used_ai = 0;
    for (const mac::Grant& g : a.grants) used_ai += g.bearer == Bearer::kAi ? g.prbs.count : 0;
    prb_used_[di] += used;
    prb_used_ai_[di] += used_ai;
    if (a.direction == Direction::kDl) {
      dl_active_hist_[a.cell * window_ + slot] = used > 0;
      dl_occupancy_hist_[a.cell * window_ + slot] = static_cast<double>(used) / cfg_.radio.prbs;
      continue;
    }
    for (const mac::Grant& g : a.grants) {
      for (int victim = 0; victim < cells; ++victim) {
        if (victim == a.cell) continue;
        const Device& src = devices_[g.device_id];
        const double p = db_to_lin(src.ul_psd_dbm + src.link.sector_gain_db[victim]);
        double* row = &ul_prb[static_cast<size_t>(victim) * cfg_.radio.prbs];
        for (int k = g.prbs.start; k < g.prbs.end(); ++k) row[k] += p;
      }
    }
  }
  for (int c = 0; c < cells; ++c) {
    const double* row = &ul_prb[static_cast<size_t>(c) * cfg_.radio.prbs];
    ul_peak_hist_[c * window_ + slot] = *std::max_element(row, row + cfg_.radio.prbs);
    double sum = 0.0;
    for (int k = 0; k < cfg_.radio.prbs; ++k) sum += row[k];
    ul_mean_hist_[c * window_ + slot] = sum / cfg_.radio.prbs;
  }

  if (!records.empty()) {
    const int64_t fb_tti = tti + cfg_.mac.harq_rtt_tti;
    std::vector<TxRecord> fb = records;
    engine_.schedule(tti_ * fb_tti, EventKind::kHarqFeedback,
                     [this, fb_tti, fb = std::move(fb)](Engine&) { on_feedback(fb_tti, fb); });
  }
  decoded_last_tti_ = std::move(records);

  const SimTime next = now + tti_;
  if (next <= horizon_) {
    engine_.schedule(next, EventKind::kTtiBoundary, [this, tti](Engine&) { on_tti(tti + 1); });
  }
}

void Simulation::on_feedback(int64_t fb_tti, const std::vector<TxRecord>& records) {
  const SimTime now = engine_.now();
  for (const TxRecord& rec : records) {
    mac::CellScheduler& s = sched(rec.cell, rec.dir);
    if (!s.find(rec.harq_id)) continue;  // flushed
    mac::HarqProcess done;
    const mac::HarqResult r = s.on_harq_feedback(rec.harq_id, rec.success, fb_tti, &done);
    rlc::RlcEntity& entity = *devices_[rec.device].rlc[index(rec.dir)];
    if (r == mac::HarqResult::kDelivered) {
      for (size_t j = 0; j < done.payload.size(); ++j) entity.on_pdu_outcome(done.payload[j], !rec.pdu_lost[j], now);
    } else if (r == mac::HarqResult::kDropped) {
      (rec.bearer == Bearer::kUrllc ? result_.diag.harq_drops_urllc : result_.diag.harq_drops_ai)++;
      for (const rlc::RlcPdu& pdu : done.payload) entity.on_pdu_outcome(pdu, false, now);
    }
  }
}

void Simulation::check_invariants() {
  ++result_.diag.invariant_checks;
  for (const Device& d : devices_) {
    for (Direction dir : kDirs) {
      const std::string err = d.rlc[index(dir)]->check_invariants();
      if (!err.empty() && result_.diag.invariant_failures.size() < 10) {
        std::ostringstream os;
        os << "t=" << engine_.now().ns() << "ns device " << d.id << " " << to_string(dir) << ": " << err;
        result_.diag.invariant_failures.push_back(os.str());
      }
    }
  }
}

RunResult Simulation::run(const std::string& run_id) {
  result_.run_id = run_id;
  result_.seed = seed_;
  result_.n_devices = cfg_.fl.n_devices;
  result_.eta = cfg_.eta;
  result_.n_required = cfg_.fl.n_required;
  result_.model_bytes = cfg_.fl.model_bytes();
  result_.config_hash = cfg_.hash_hex();

  RngStream phase_rng = rng_.stream("traffic-phase");
  const int64_t period_ns = SimTime::from_seconds(cfg_.urllc.period_ms * 1e-3).ns();
  for (int id = 0; id < ai_offset_; ++id) {
    for (Direction dir : kDirs) {
      const int64_t ph = static_cast<int64_t>(phase_rng.uniform_int(static_cast<uint64_t>(period_ns)));
      start_urllc_flow(devices_[id], dir, SimTime::from_ns(cfg_.urllc.random_phase ? ph : 0));
    }
  }

  if (cfg_.fl.n_devices > 0) {
    RngStream learner_rng = rng_.stream("learner");
    fl_ = std::make_unique<fl::FlOrchestrator>(cfg_.fl, fl::make_problem(cfg_.fl.n_devices, cfg_.fl.dim, learner_rng),
                                               engine_, *this);
    fl_->start(SimTime{});
  }
  engine_.schedule(SimTime{}, EventKind::kTtiBoundary, [this](Engine&) { on_tti(0); });
  if (cfg_.sim.check_invariants) {
    engine_.set_post_dispatch_hook([this](const Engine&) { check_invariants(); });
  }

  engine_.run_until(horizon_);
  result_.diag.events = engine_.dispatched();

  for (int id = 0; id < ai_offset_; ++id) {
    Device& d = devices_[id];
    UrllcDeviceResult r;
    r.device_id = id;
    r.cell = d.link.serving_cell;
    const auto& ul = *d.monitor[index(Direction::kUl)];
    const auto& dl = *d.monitor[index(Direction::kDl)];
    const metrics::StateTrace x_ul = ul.x_trace(horizon_);
    const metrics::StateTrace x_dl = dl.x_trace(horizon_);
    const metrics::StateTrace y_ul = metrics::apply_survival(x_ul, SimTime::from_seconds(cfg_.urllc.ul_survival_ms * 1e-3));
    const metrics::StateTrace y_dl = metrics::apply_survival(x_dl, SimTime::from_seconds(cfg_.urllc.dl_survival_ms * 1e-3));
    r.avail_ul = metrics::availability(y_ul, horizon_);
    r.avail_dl = metrics::availability(y_dl, horizon_);
    r.avail_combined = metrics::availability(metrics::combine_and(y_ul, y_dl), horizon_);
    r.ul = ul.counters();
    r.dl = dl.counters();
    r.ul_due = ul.due_by(horizon_);
    r.dl_due = dl.due_by(horizon_);
    result_.urllc.push_back(r);
    result_.x_traces.push_back(x_ul);
    result_.x_traces.push_back(x_dl);
  }

  for (int i = 0; i < cfg_.fl.n_devices; ++i) {
    Device& d = ai(i);
    auto add = [](rlc::RlcCounters& dst, const rlc::RlcCounters& src) {
      dst.enqueued += src.enqueued;
      dst.delivered += src.delivered;
      dst.failed += src.failed;
      dst.discarded += src.discarded;
    };
    add(result_.diag.ai_dl, d.rlc[index(Direction::kDl)]->counters());
    add(result_.diag.ai_ul, d.rlc[index(Direction::kUl)]->counters());
  }
  if (fl_) {
    result_.rounds = fl_->records();
    result_.diag.fl_resent = fl_->resent_sdus();
    result_.diag.fl_discarded_uploads = fl_->discarded_uploads();
  }
  const double total = static_cast<double>(result_.diag.ttis) * cfg_.radio.prbs * static_cast<double>(cell_devices_.size());
  result_.diag.ai_prb_share_ul = total > 0 ? prb_used_ai_[0] / total : 0.0;
  result_.diag.ai_prb_share_dl = total > 0 ? prb_used_ai_[1] / total : 0.0;
  return std::move(result_);
}

}  // namespace

std::vector<double> RunResult::combined_availability() const {
  std::vector<double> out;
  for (const UrllcDeviceResult& u : urllc) out.push_back(u.avail_combined);
  return out;
}

std::vector<double> RunResult::round_delays() const {
  std::vector<double> out;
  for (const fl::RoundRecord& r : rounds) out.push_back(r.d_k_ai_s);
  return out;
}

RunResult run_scenario(const ScenarioConfig& cfg, uint64_t seed, const std::string& run_id) {
  Simulation sim(cfg, seed);
  return sim.run(run_id.empty() ? "run_s" + std::to_string(seed) : run_id);
}

}  // namespace coexist
