// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "coexist/fl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coexist::fl {

int64_t FlConfig::model_bytes() const {
  return static_cast<int64_t>(std::llround(params)) * bytes_per_param;
}

SimTime FlConfig::local_compute() const { return SimTime::from_seconds(compute_c0_s + compute_c1_s * params); }

void FlConfig::validate() const {
  if (n_devices < 0) throw std::invalid_argument("fl: N must be >= 0");
  if (n_devices > 0 && (n_required < 1 || n_required > n_devices)) {
    throw std::invalid_argument("fl: n must satisfy 1 <= n <= N");
  }
  if (params < 1) throw std::invalid_argument("fl: params must be >= 1");
  if (bytes_per_param < 1) throw std::invalid_argument("fl: bytes_per_param must be >= 1");
  if (!(step_size > 0)) throw std::invalid_argument("fl: step size must be positive");
  if (local_steps < 1) throw std::invalid_argument("fl: local_steps must be >= 1");
  if (dim < 1) throw std::invalid_argument("fl: dim must be >= 1");
  if (compute_c0_s < 0 || compute_c1_s < 0 || master_compute_s < 0) {
    throw std::invalid_argument("fl: compute delays must be >= 0");
  }
}

double LearnerProblem::loss(int i, const Vec& w) const { return 0.5 * (a[i] * w - b[i]).squaredNorm(); }

Vec LearnerProblem::gradient(int i, const Vec& w) const { return a[i].transpose() * (a[i] * w - b[i]); }

Vec LearnerProblem::minimizer() const {
  const int d = dim();
  Mat h = Mat::Zero(d, d);
  Vec g = Vec::Zero(d);
  for (size_t i = 0; i < a.size(); ++i) {
    h += a[i].transpose() * a[i];
    g += a[i].transpose() * b[i];
  }
  return h.ldlt().solve(g);
}

LearnerProblem make_problem(int devices, int dim, RngStream& rng) {
  LearnerProblem p;
  Vec w_true(dim);
  for (int j = 0; j < dim; ++j) w_true[j] = rng.normal();
  const double spread = 0.3 / std::sqrt(static_cast<double>(dim));
  for (int i = 0; i < devices; ++i) {
    Mat a = Mat::Identity(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) a(r, c) += spread * rng.normal();
    }
    Vec local = w_true;
    for (int j = 0; j < dim; ++j) local[j] += 0.5 * rng.normal();
    p.b.push_back(a * local);
    p.a.push_back(std::move(a));
  }
  return p;
}

namespace {

void require_finite(const Vec& v, const char* what, int device) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << what << " produced non-finite values on device " << device << ": [" << v.transpose() << "]";
    throw NumericError(os.str());
  }
}

}  // namespace

Vec local_update(const LearnerProblem& prob, int i, const Vec& w, LearnerMode mode, double step_size,
                 int local_steps) {
  Vec out;
  if (mode == LearnerMode::kGradient) {
    out = prob.gradient(i, w);
  } else {
    out = w;
    for (int s = 0; s < local_steps; ++s) out -= step_size * prob.gradient(i, out);
  }
  require_finite(out, "local update", i);
  return out;
}

Vec global_update(const Vec& w, std::span<const Vec> uploads, LearnerMode mode, double step_size) {
  if (uploads.empty()) throw std::invalid_argument("global_update: no uploads");
  Vec sum = Vec::Zero(w.size());
  for (const Vec& c : uploads) sum += c;
  const double n = static_cast<double>(uploads.size());
  Vec out = mode == LearnerMode::kGradient ? Vec(w - (step_size / n) * sum) : Vec(sum / n);
  require_finite(out, "global update", -1);
  return out;
}

double iteration_delay(std::span<const double> completion_s, int n, double master_compute_s) {
  if (n < 1 || static_cast<size_t>(n) > completion_s.size()) {
    throw std::invalid_argument("iteration_delay: fewer than n completed uploads");
  }
  std::vector<double> c(completion_s.begin(), completion_s.end());
  std::nth_element(c.begin(), c.begin() + (n - 1), c.end());
  return c[n - 1] + master_compute_s;
}

Convergence convergence_check(const Vec& w, const Vec& w_star, double tol) {
  const double d = (w - w_star).norm();
  return {d <= tol, d};
}

Convergence convergence_check(const Vec& w, const LearnerProblem& prob, double tol) {
  return convergence_check(w, prob.minimizer(), tol);
}

std::vector<double> RoundState::completion_seconds() const {
  std::vector<double> out;
  for (int i : received) out.push_back((*devices[i].ul_done - start).seconds());
  return out;
}

// ---------------------------------------------------------------------------

FlOrchestrator::FlOrchestrator(FlConfig cfg, LearnerProblem problem, Engine& engine, FlTransport& transport)
    : cfg_(cfg), problem_(std::move(problem)), engine_(engine), transport_(transport) {
  cfg_.validate();
  if (problem_.devices() != cfg_.n_devices) throw std::invalid_argument("fl: problem size != N");
  w_ = Vec::Zero(problem_.dim());
  w_star_ = problem_.minimizer();
}

void FlOrchestrator::start(SimTime t) {
  engine_.schedule(t, EventKind::kRoundTrigger, [this](Engine&) { start_round(0); });
}

void FlOrchestrator::start_round(int64_t k) {
  for (int i = 0; i < cfg_.n_devices; ++i) transport_.cancel(i);
  round_ = RoundState{};
  round_.k = k;
  round_.start = engine_.now();
  round_.devices.assign(cfg_.n_devices, DeviceRound{});
  round_.uploads.assign(cfg_.n_devices, Vec());
  for (int i = 0; i < cfg_.n_devices; ++i) transport_.send_model(i, cfg_.model_bytes(), make_tag(k));
}

void FlOrchestrator::on_model_delivered(int device, uint64_t tag, SimTime t) {
  if (tag != make_tag(round_.k) || round_.update_time) return;
  DeviceRound& d = round_.devices.at(device);
  if (d.dl_done) return;
  d.dl_done = t;
  const int64_t k = round_.k;
  engine_.schedule(t + cfg_.local_compute(), EventKind::kComputeDone, [this, device, k](Engine& e) {
    if (round_.k != k || round_.update_time) return;
    round_.devices[device].compute_done = e.now();
    round_.uploads[device] = local_update(problem_, device, w_, cfg_.mode, cfg_.step_size, cfg_.local_steps);
    transport_.send_upload(device, cfg_.model_bytes(), make_tag(k));
  });
}

void FlOrchestrator::on_upload_delivered(int device, uint64_t tag, SimTime t) {
  if (tag != make_tag(round_.k) || round_.update_time) {
    ++discarded_uploads_;
    return;
  }
  DeviceRound& d = round_.devices.at(device);
  if (d.ul_done) return;
  d.ul_done = t;
  round_.received.push_back(device);
  if (!round_.first_n_fixed && static_cast<int>(round_.received.size()) == cfg_.n_required) {
    round_.first_n_fixed = true;
    for (int i : round_.received) round_.devices[i].in_first_n = true;
    const int64_t k = round_.k;
    engine_.schedule(t + SimTime::from_seconds(cfg_.master_compute_s), EventKind::kRoundTrigger,
                     [this, k](Engine&) {
                       if (round_.k == k) finish_round();
                     });
  }
}

void FlOrchestrator::on_model_failed(int device, uint64_t tag) {
  if (tag != make_tag(round_.k) || round_.update_time) return;
  ++resent_;
  transport_.send_model(device, cfg_.model_bytes(), tag);
}

void FlOrchestrator::on_upload_failed(int device, uint64_t tag) {
  if (tag != make_tag(round_.k) || round_.update_time) return;
  ++resent_;
  transport_.send_upload(device, cfg_.model_bytes(), tag);
}

void FlOrchestrator::finish_round() {
  round_.update_time = engine_.now();
  std::vector<Vec> used;
  for (int i = 0; i < cfg_.n_required; ++i) used.push_back(round_.uploads[round_.received[i]]);
  w_ = global_update(w_, used, cfg_.mode, cfg_.step_size);

  RoundRecord rec;
  rec.k = round_.k;
  const std::vector<double> c = round_.completion_seconds();
  rec.d_k_ai_s = iteration_delay(c, cfg_.n_required, cfg_.master_compute_s);
  rec.d_k_from_timestamps_s = (*round_.update_time - round_.start).seconds();
  rec.n_received_at_update = static_cast<int>(round_.received.size());
  rec.dist_to_wstar = (w_ - w_star_).norm();
  for (int i = 0; i < cfg_.n_devices; ++i) {
    const DeviceRound& d = round_.devices[i];
    RoundRecord::Detail det;
    det.device_id = i;
    if (d.dl_done) det.d_dl_s = (*d.dl_done - round_.start).seconds();
    if (d.dl_done && d.compute_done) det.d_compute_s = (*d.compute_done - *d.dl_done).seconds();
    if (d.compute_done && d.ul_done) det.d_ul_s = (*d.ul_done - *d.compute_done).seconds();
    det.in_first_n = d.in_first_n;
    rec.detail.push_back(det);
  }
  records_.push_back(std::move(rec));
  start_round(round_.k + 1);
}

}  // namespace coexist::fl
