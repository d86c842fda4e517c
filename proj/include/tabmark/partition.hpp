// Copyright 2026 The tabmark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Per-cell green/red decomposition of the perturbation range [-p, p] or of a
// category set. Both embedding and detection rebuild the partition from the
// cell seed, so everything here must be a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "tabmark/error.hpp"
#include "tabmark/rng.hpp"

namespace tabmark {

struct CellSeed {
  std::uint64_t value = 0;
  friend bool operator==(CellSeed, CellSeed) = default;
};

enum class Domain { kGreen, kRed, kOutOfRange };

constexpr std::string_view to_string(Domain d) noexcept {
  switch (d) {
    case Domain::kGreen:
      return "green";
    case Domain::kRed:
      return "red";
    case Domain::kOutOfRange:
      return "out_of_range";
  }
  return "?";
}

struct PartitionParams {
  double p = 1.0;      // half-width of the perturbation range, attribute units
  int k = 500;         // number of unit domains
  double gamma = 0.5;  // green fraction

  int green_count() const noexcept { return static_cast<int>(std::lround(gamma * k)); }
  double unit_width() const noexcept { return 2.0 * p / k; }

  void validate() const {
    if (!(p > 0) || !std::isfinite(p)) throw ConfigError("partition: p must be positive and finite");
    if (k < 2) throw ConfigError("partition: k must be at least 2");
    if (!(gamma > 0 && gamma < 1)) throw ConfigError("partition: gamma must lie in (0, 1)");
    const int g = green_count();
    if (g < 1 || g > k - 1)
      throw ConfigError("partition: round(gamma*k) = " + std::to_string(g) + " leaves a side empty");
  }

  friend bool operator==(const PartitionParams&, const PartitionParams&) = default;
};

/// Half-open [lo, hi); the last unit domain is closed at p.
struct Interval {
  double lo = 0;
  double hi = 0;
  double width() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

class NumericPartition {
 public:
  NumericPartition(PartitionParams params, std::vector<bool> green) : params_(params), green_(std::move(green)) {}

  const PartitionParams& params() const noexcept { return params_; }
  int unit_count() const noexcept { return params_.k; }
  bool is_green_unit(int i) const { return green_.at(static_cast<std::size_t>(i)); }

  /// Lower boundary of unit i, i in [0, k]. bound(k) is exactly p.
  double bound(int i) const noexcept {
    if (i <= 0) return -params_.p;
    if (i >= params_.k) return params_.p;
    return -params_.p + params_.unit_width() * i;
  }

  Interval unit(int i) const noexcept { return {bound(i), bound(i + 1)}; }

  /// Unit index containing `value`, or nullopt when |value| > p or NaN.
  std::optional<int> unit_index(double value) const noexcept {
    if (!(value >= -params_.p && value <= params_.p)) return std::nullopt;
    const int k = params_.k;
    int i = static_cast<int>(std::floor((value + params_.p) / params_.unit_width()));
    i = std::clamp(i, 0, k - 1);
    // Snap to the boundaries bound() actually returns.
    while (i > 0 && value < bound(i)) --i;
    while (i < k - 1 && value >= bound(i + 1)) ++i;
    return i;
  }

  Domain classify(double value) const noexcept {
    const auto i = unit_index(value);
    if (!i) return Domain::kOutOfRange;
    return green_[static_cast<std::size_t>(*i)] ? Domain::kGreen : Domain::kRed;
  }

  std::vector<int> green_units() const {
    std::vector<int> out;
    for (int i = 0; i < params_.k; ++i)
      if (green_[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
  }

  std::vector<Interval> green_intervals() const { return intervals(true); }
  std::vector<Interval> red_intervals() const { return intervals(false); }

  /// Realized green length fraction, round(gamma*k)/k.
  double green_fraction() const noexcept {
    return static_cast<double>(std::count(green_.begin(), green_.end(), true)) / params_.k;
  }

 private:
  std::vector<Interval> intervals(bool want_green) const {
    std::vector<Interval> out;
    for (int i = 0; i < params_.k; ++i)
      if (green_[static_cast<std::size_t>(i)] == want_green) out.push_back(unit(i));
    return out;
  }

  PartitionParams params_;
  std::vector<bool> green_;
};

/// Seeded shuffle of the unit indices; the first round(gamma*k) become green.
inline NumericPartition partition_numeric(CellSeed seed, const PartitionParams& params) {
  params.validate();
  std::vector<int> order(static_cast<std::size_t>(params.k));
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed.value, Stream::kPartition);
  rng.shuffle(std::span<int>(order));
  std::vector<bool> green(order.size(), false);
  for (int i = 0; i < params.green_count(); ++i) green[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  return NumericPartition(params, std::move(green));
}

class CategoryPartition {
 public:
  CategoryPartition(std::vector<std::string> green, std::vector<std::string> red)
      : green_(std::move(green)), red_(std::move(red)) {
    green_set_.insert(green_.begin(), green_.end());
    red_set_.insert(red_.begin(), red_.end());
  }

  /// Green tokens in category-order.
  const std::vector<std::string>& green() const noexcept { return green_; }
  const std::vector<std::string>& red() const noexcept { return red_; }

  Domain classify(const std::string& token) const {
    if (green_set_.contains(token)) return Domain::kGreen;
    if (red_set_.contains(token)) return Domain::kRed;
    return Domain::kOutOfRange;
  }

  double green_fraction() const noexcept {
    return static_cast<double>(green_.size()) / static_cast<double>(green_.size() + red_.size());
  }

 private:
  std::vector<std::string> green_;
  std::vector<std::string> red_;
  std::unordered_set<std::string> green_set_;
  std::unordered_set<std::string> red_set_;
};

/// |green| = floor(gamma*c), clamped into [1, c-1].
inline std::size_t category_green_count(std::size_t categories, double gamma) {
  auto g = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(categories)));
  return std::clamp<std::size_t>(g, 1, categories - 1);
}

inline CategoryPartition partition_categorical(CellSeed seed, std::span<const std::string> categories, double gamma) {
  if (categories.size() < 2) throw ConfigError("categorical partition needs at least two categories");
  if (!(gamma > 0 && gamma < 1)) throw ConfigError("partition: gamma must lie in (0, 1)");
  std::vector<std::size_t> order(categories.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(seed.value, Stream::kPartition);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t g = category_green_count(categories.size(), gamma);
  std::vector<bool> is_green(categories.size(), false);
  for (std::size_t i = 0; i < g; ++i) is_green[order[i]] = true;
  std::vector<std::string> green, red;
  for (std::size_t i = 0; i < categories.size(); ++i) (is_green[i] ? green : red).push_back(categories[i]);
  return CategoryPartition(std::move(green), std::move(red));
}

}  // namespace tabmark
