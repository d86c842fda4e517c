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

// Synthetic two-feature classification tables: dim0, dim1 ~ N(mu, sigma),
// target ~ Bernoulli(logistic(w0 dim0 + w1 dim1)).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabmark/error.hpp"
#include "tabmark/rng.hpp"
#include "tabmark/tabular.hpp"

namespace tabmark {

struct SynthConfig {
  std::size_t rows = 2000;
  double mu = 0;
  double sigma = 20;  // standard deviation
  std::optional<std::array<double, 2>> weights;  // drawn from U[-1, 1] when unset
  std::uint64_t seed = 0;
  /// Additional N(mu, sigma) feature columns dim2, dim3, ... that do not
  /// influence the target. Handy as extra match attributes.
  std::size_t extra_features = 0;

  void validate() const {
    if (rows == 0) throw ConfigError("synth: rows must be positive");
    if (!(sigma > 0 && std::isfinite(sigma))) throw ConfigError("synth: sigma must be positive");
    if (!std::isfinite(mu)) throw ConfigError("synth: mu must be finite");
    if (weights)
      for (double w : *weights)
        if (!(w >= -1 && w <= 1)) throw ConfigError("synth: weights must lie in [-1, 1]");
  }
};

struct SynthDataset {
  TabularData table;
  std::array<double, 2> weights{};
  SynthConfig config;
};

inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

inline SynthDataset generate(const SynthConfig& config) {
  config.validate();
  CounterRng rng(config.seed, Stream::kSynth);
  std::array<double, 2> w{};
  if (config.weights) {
    w = *config.weights;
  } else {
    w = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }

  const std::size_t features = 2 + config.extra_features;
  std::vector<std::vector<double>> dims(features, std::vector<double>(config.rows));
  std::vector<double> target(config.rows);
  for (std::size_t r = 0; r < config.rows; ++r) {
    for (std::size_t d = 0; d < features; ++d) dims[d][r] = rng.normal(config.mu, config.sigma);
    const double prob = logistic(w[0] * dims[0][r] + w[1] * dims[1][r]);
    target[r] = rng.uniform01() < prob ? 1.0 : 0.0;
  }

  SynthDataset out;
  for (std::size_t d = 0; d < features; ++d) out.table.add_column(Column("dim" + std::to_string(d), std::move(dims[d])));
  out.table.add_column(Column("target", std::move(target)));
  out.weights = w;
  out.config = config;
  return out;
}

/// Sidecar metadata written next to generated CSVs.
inline nlohmann::ordered_json synth_metadata(const SynthDataset& ds) {
  nlohmann::ordered_json j;
  j["generator_id"] = std::string(kGeneratorId);
  j["rows"] = ds.config.rows;
  j["mu"] = ds.config.mu;
  j["sigma"] = ds.config.sigma;
  j["weights"] = {ds.weights[0], ds.weights[1]};
  j["weights_drawn"] = !ds.config.weights.has_value();
  j["seed"] = std::to_string(ds.config.seed);
  j["extra_features"] = ds.config.extra_features;
  j["target"] = "target";
  return j;
}

}  // namespace tabmark
