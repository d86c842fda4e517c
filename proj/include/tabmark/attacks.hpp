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

// Simulated attacks on a watermarked table. Each attack is a deterministic
// function of (data, spec); the spec's seed drives a dedicated stream.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabmark/error.hpp"
#include "tabmark/rng.hpp"
#include "tabmark/tabular.hpp"

namespace tabmark {

enum class AttackKind { kAlteration, kInsertion, kDeletion, kShuffle };

enum class AttackNoise { kUniform, kGaussian, kLaplace, kCategoryReplace };

inline AttackKind parse_attack_kind(std::string_view s) {
  if (s == "alteration") return AttackKind::kAlteration;
  if (s == "insertion") return AttackKind::kInsertion;
  if (s == "deletion") return AttackKind::kDeletion;
  if (s == "shuffle") return AttackKind::kShuffle;
  throw ConfigError("unknown attack type '" + std::string(s) + "'");
}

inline AttackNoise parse_attack_noise(std::string_view s) {
  if (s == "uniform") return AttackNoise::kUniform;
  if (s == "gaussian") return AttackNoise::kGaussian;
  if (s == "laplace") return AttackNoise::kLaplace;
  if (s == "category" || s == "category-replace") return AttackNoise::kCategoryReplace;
  throw ConfigError("unknown attack noise '" + std::string(s) + "'");
}

struct AttackSpec {
  AttackKind kind = AttackKind::kAlteration;
  std::string attribute;                       // alteration only
  double beta = 0;                             // affected fraction, [0, 1]
  AttackNoise noise = AttackNoise::kUniform;   // alteration only
  double scale = 0;  // uniform: half-width, gaussian: sigma, laplace: scale b
  std::uint64_t seed = 0;

  void validate() const {
    if (!(beta >= 0 && beta <= 1)) throw ConfigError("attack: beta must lie in [0, 1]");
    if (kind == AttackKind::kAlteration && noise != AttackNoise::kCategoryReplace && !(scale >= 0 && std::isfinite(scale)))
      throw ConfigError("attack: noise scale must be finite and non-negative");
  }
};

/// ceil(beta * rows) rows of `spec.attribute` perturbed. Numeric columns get
/// additive noise, categorical columns a uniform token from the full
/// category set (which may equal the current one). Missing cells stay missing.
inline TabularData alteration_attack(const TabularData& data, const AttackSpec& spec) {
  spec.validate();
  TabularData out = data;
  Column& col = out.column(spec.attribute);
  const auto n = data.row_count();
  const auto m = static_cast<std::size_t>(std::ceil(spec.beta * static_cast<double>(n)));
  CounterRng rng(spec.seed, Stream::kAttack);
  const auto rows = rng.sample_indices(n, m);
  if (col.is_numeric()) {
    if (spec.noise == AttackNoise::kCategoryReplace)
      throw ConfigError("attack: category replacement on numeric attribute '" + spec.attribute + "'");
    auto& values = col.mutable_numbers();
    for (auto r : rows) {
      double eps = 0;
      switch (spec.noise) {
        case AttackNoise::kUniform:
          eps = rng.uniform(-spec.scale, spec.scale);
          break;
        case AttackNoise::kGaussian:
          eps = rng.normal(0.0, spec.scale);
          break;
        case AttackNoise::kLaplace:
          eps = rng.laplace(spec.scale);
          break;
        case AttackNoise::kCategoryReplace:
          break;
      }
      if (!std::isnan(values[r])) values[r] += eps;
    }
  } else {
    const auto cats = col.categories();
    auto& tokens = col.mutable_tokens();
    for (auto r : rows) {
      if (tokens[r].empty() || cats.empty()) continue;
      tokens[r] = cats[static_cast<std::size_t>(rng.below(cats.size()))];
    }
  }
  return out;
}

/// ceil(beta * rows) random rows inserted at uniformly random positions.
/// Numeric cells are uniform over the column's observed [min, max];
/// categorical cells uniform over its category set.
inline TabularData insertion_attack(const TabularData& data, const AttackSpec& spec) {
  spec.validate();
  const auto n = data.row_count();
  const auto m = static_cast<std::size_t>(std::ceil(spec.beta * static_cast<double>(n)));
  if (m == 0) return data;
  CounterRng rng(spec.seed, Stream::kAttack);

  // Positions of inserted rows in the output: a uniformly random m-subset.
  std::vector<bool> inserted(n + m, false);
  for (auto pos : rng.sample_indices(n + m, m)) inserted[pos] = true;

  TabularData out;
  for (const auto& col : data.columns()) {
    if (col.is_numeric()) {
      const auto [lo, hi] = col.range();
      std::vector<double> values;
      values.reserve(n + m);
      std::size_t src = 0;
      for (std::size_t i = 0; i < n + m; ++i)
        values.push_back(inserted[i] ? (std::isnan(lo) ? kMissing : rng.uniform(lo, hi)) : col.number(src++));
      out.add_column(Column(col.name(), std::move(values)));
    } else {
      const auto cats = col.categories();
      std::vector<std::string> values;
      values.reserve(n + m);
      std::size_t src = 0;
      for (std::size_t i = 0; i < n + m; ++i) {
        if (!inserted[i]) {
          values.push_back(col.token(src++));
        } else {
          values.push_back(cats.empty() ? std::string() : cats[static_cast<std::size_t>(rng.below(cats.size()))]);
        }
      }
      out.add_column(Column(col.name(), std::move(values)));
    }
  }
  return out;
}

/// floor(beta * rows) uniformly random rows removed; survivors keep order.
inline TabularData deletion_attack(const TabularData& data, const AttackSpec& spec) {
  spec.validate();
  const auto n = data.row_count();
  const auto m = static_cast<std::size_t>(std::floor(spec.beta * static_cast<double>(n)));
  CounterRng rng(spec.seed, Stream::kAttack);
  std::vector<bool> removed(n, false);
  for (auto r : rng.sample_indices(n, m)) removed[r] = true;
  std::vector<std::size_t> keep;
  keep.reserve(n - m);
  for (std::size_t r = 0; r < n; ++r)
    if (!removed[r]) keep.push_back(r);
  return data.select_rows(keep);
}

inline TabularData shuffle_attack(const TabularData& data, const AttackSpec& spec) {
  CounterRng rng(spec.seed, Stream::kAttack);
  std::vector<std::size_t> order(data.row_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  return data.select_rows(order);
}

inline TabularData apply_attack(const TabularData& data, const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::kAlteration:
      return alteration_attack(data, spec);
    case AttackKind::kInsertion:
      return insertion_attack(data, spec);
    case AttackKind::kDeletion:
      return deletion_attack(data, spec);
    case AttackKind::kShuffle:
      return shuffle_attack(data, spec);
  }
  throw ConfigError("attack: unknown kind");
}

}  // namespace tabmark
