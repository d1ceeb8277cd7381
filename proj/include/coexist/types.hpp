// Copyright 2026 The coexist Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace coexist {

enum class Bearer : uint8_t { kUrllc = 0, kAi = 1 };
enum class Direction : uint8_t { kUl = 0, kDl = 1 };

inline constexpr std::string_view to_string(Bearer b) { return b == Bearer::kUrllc ? "URLLC" : "AI"; }
inline constexpr std::string_view to_string(Direction d) { return d == Direction::kUl ? "UL" : "DL"; }

inline constexpr int index(Bearer b) { return static_cast<int>(b); }
inline constexpr int index(Direction d) { return static_cast<int>(d); }

}  // namespace coexist
