// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace coexist {

uint64_t fnv1a64(std::string_view bytes);

/// Counter-based random stream: draw i is a pure function of
/// (base_seed, label, i). Streams never share state, so the order in which
/// modules consume randomness cannot perturb each other.
class RngStream {
 public:
  RngStream(uint64_t base_seed, std::string label);

  const std::string& label() const { return label_; }
  uint64_t draws() const { return counter_; }

  uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  uint64_t uniform_int(uint64_t n);
  double normal(double mean = 0.0, double stddev = 1.0);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::string label_;
  uint64_t key_;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Hands out labelled streams for one run.
class RngFactory {
 public:
  explicit RngFactory(uint64_t base_seed) : seed_(base_seed) {}
  uint64_t seed() const { return seed_; }
  RngStream stream(std::string label) const { return RngStream(seed_, std::move(label)); }

 private:
  uint64_t seed_;
};

}  // namespace coexist
