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

// Watermark embedding: key-cell selection, green-domain noise samplers, the
// embedding transform itself and the key file format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tabmark/error.hpp"
#include "tabmark/partition.hpp"
#include "tabmark/rng.hpp"
#include "tabmark/stats.hpp"
#include "tabmark/tabular.hpp"

namespace tabmark {

inline constexpr int kKeyFormatVersion = 1;
inline constexpr std::uint64_t kRejectionCap = 1'000'000;

enum class NoiseKind { kUniform, kTruncatedNormal };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kUniform;
  double sigma_t = 0;  // only for kTruncatedNormal

  static NoiseModel uniform() noexcept { return {}; }
  static NoiseModel truncated_normal(double sigma_t) noexcept { return {NoiseKind::kTruncatedNormal, sigma_t}; }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct EmbedConfig {
  std::string attribute;
  std::size_t n_cells = 0;
  PartitionParams params;  // p and k are ignored for categorical attributes
  NoiseModel noise;
  std::uint64_t master_seed = 0;
  std::vector<std::string> match_attributes;

  void validate(const TabularData& data) const {
    const Column& col = data.column(attribute);
    if (n_cells == 0) throw ConfigError("embed: number of key cells must be positive");
    if (n_cells > data.row_count())
      throw ConfigError("embed: " + std::to_string(n_cells) + " key cells requested but table has only " +
                        std::to_string(data.row_count()) + " rows");
    if (col.is_numeric()) {
      params.validate();
    } else if (!(params.gamma > 0 && params.gamma < 1)) {
      throw ConfigError("embed: gamma must lie in (0, 1)");
    }
    if (noise.kind == NoiseKind::kTruncatedNormal && !(noise.sigma_t > 0 && std::isfinite(noise.sigma_t)))
      throw ConfigError("embed: truncated-normal noise needs a positive sigma_t");
    if (match_attributes.size() < 2 || match_attributes.size() > 3)
      throw ConfigError("embed: expected 2 or 3 match attributes, got " + std::to_string(match_attributes.size()));
    std::unordered_set<std::string> seen;
    for (const auto& name : match_attributes) {
      if (name == attribute) throw ConfigError("embed: the watermark attribute cannot be a match attribute");
      if (!seen.insert(name).second) throw ConfigError("embed: match attribute '" + name + "' listed twice");
      const Column& m = data.column(name);
      for (std::size_t r = 0; r < data.row_count(); ++r)
        if (m.is_missing(r))
          throw ConfigError("embed: match attribute '" + name + "' has a missing cell at row " + std::to_string(r));
    }
    for (std::size_t r = 0; r < data.row_count(); ++r)
      if (col.is_missing(r))
        throw ConfigError("embed: watermark attribute '" + attribute + "' has a missing cell at row " +
                          std::to_string(r));
    if (!col.is_numeric() && col.categories().size() < 2)
      throw ConfigError("embed: categorical attribute '" + attribute + "' needs at least two categories");
  }
};

struct KeyCell {
  std::size_t row = 0;
  CellSeed seed;
  friend bool operator==(const KeyCell&, const KeyCell&) = default;
};

/// The owner's secret. Everything detection needs besides D_o.
struct WatermarkKey {
  int version = kKeyFormatVersion;
  std::string generator_id{kGeneratorId};
  std::string attribute;
  ColumnKind kind = ColumnKind::kNumeric;
  PartitionParams params;
  NoiseModel noise;
  std::vector<std::string> match_attributes;
  std::vector<KeyCell> cells;
  std::vector<std::string> category_order;  // categorical only
  std::string created;                      // informational, ignored by ==

  std::size_t n_cells() const noexcept { return cells.size(); }

  void validate(std::optional<std::size_t> row_count = std::nullopt) const {
    if (version != kKeyFormatVersion) throw ConfigError("key: unsupported format version " + std::to_string(version));
    if (cells.empty()) throw ConfigError("key: no key cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0 && cells[i].row <= cells[i - 1].row) throw ConfigError("key: rows must be strictly increasing");
      if (row_count && cells[i].row >= *row_count)
        throw ConfigError("key: row " + std::to_string(cells[i].row) + " outside a table of " +
                          std::to_string(*row_count) + " rows");
    }
    if (kind == ColumnKind::kNumeric) {
      params.validate();
    } else {
      if (category_order.size() < 2) throw ConfigError("key: categorical key needs at least two categories");
      std::unordered_set<std::string> seen(category_order.begin(), category_order.end());
      if (seen.size() != category_order.size()) throw ConfigError("key: duplicate token in category_order");
    }
  }

  friend bool operator==(const WatermarkKey& a, const WatermarkKey& b) {
    return a.version == b.version && a.generator_id == b.generator_id && a.attribute == b.attribute &&
           a.kind == b.kind && a.params == b.params && a.noise == b.noise &&
           a.match_attributes == b.match_attributes && a.cells == b.cells && a.category_order == b.category_order;
  }
};

/// n_cells distinct rows drawn uniformly from the master-seed stream, then one
/// seed per cell from the same stream in ascending-row order.
inline WatermarkKey select_key_cells(const TabularData& data, const EmbedConfig& config) {
  config.validate(data);
  const Column& col = data.column(config.attribute);
  CounterRng rng(config.master_seed, Stream::kKeySelection);
  auto rows = rng.sample_indices(data.row_count(), config.n_cells);
  std::sort(rows.begin(), rows.end());

  WatermarkKey key;
  key.attribute = config.attribute;
  key.kind = col.kind();
  key.params = config.params;
  key.noise = config.noise;
  key.match_attributes = config.match_attributes;
  key.cells.reserve(rows.size());
  for (auto r : rows) key.cells.push_back({r, CellSeed{rng.next()}});
  if (!col.is_numeric()) key.category_order = col.categories();
  return key;
}

/// Uniform over the green union: all units have equal width, so a uniform
/// unit pick followed by a uniform offset is length-weighted.
inline double sample_green_uniform(CounterRng& rng, const NumericPartition& partition) {
  const auto units = partition.green_units();
  for (;;) {
    const int u = units[static_cast<std::size_t>(rng.below(units.size()))];
    const Interval iv = partition.unit(u);
    const double x = iv.lo + iv.width() * rng.uniform01();
    if (partition.classify(x) == Domain::kGreen) return x;
  }
}

inline double draw_green_uniform(CellSeed seed, const NumericPartition& partition) {
  CounterRng rng(seed.value, Stream::kNoise);
  return sample_green_uniform(rng, partition);
}

/// Normal(0, sigma_t) truncated to [-p, p], rejected until green. For
/// p <= sigma_t the proposal is uniform on [-p, p] with acceptance
/// exp(-x^2 / 2 sigma_t^2); otherwise plain normal draws outside [-p, p] are
/// rejected. Both target the same density.
inline double sample_green_truncnormal(CounterRng& rng, const NumericPartition& partition, double sigma_t,
                                       std::uint64_t cap = kRejectionCap) {
  if (!(sigma_t > 0)) throw ConfigError("truncated normal: sigma_t must be positive");
  const double p = partition.params().p;
  const bool uniform_proposal = p <= sigma_t;
  const double inv_two_var = 1.0 / (2.0 * sigma_t * sigma_t);
  for (std::uint64_t it = 0; it < cap; ++it) {
    double x;
    if (uniform_proposal) {
      x = rng.uniform(-p, p);
      if (rng.uniform01() >= std::exp(-x * x * inv_two_var)) continue;
    } else {
      x = rng.normal(0.0, sigma_t);
      if (x < -p || x > p) continue;
    }
    if (partition.classify(x) == Domain::kGreen) return x;
  }
  throw SamplingError("truncated normal: no green draw after " + std::to_string(cap) + " iterations");
}

inline double draw_green_truncnormal(CellSeed seed, const NumericPartition& partition, double sigma_t) {
  CounterRng rng(seed.value, Stream::kNoise);
  return sample_green_truncnormal(rng, partition, sigma_t);
}

/// Uniform token from the green set.
inline std::string draw_green_category(CellSeed seed, const CategoryPartition& partition) {
  CounterRng rng(seed.value, Stream::kNoise);
  const auto& g = partition.green();
  return g[static_cast<std::size_t>(rng.below(g.size()))];
}

struct EmbedResult {
  TabularData watermarked;
  WatermarkKey key;
  /// Key rows whose perturbed value left the original column [min, max].
  std::vector<std::size_t> outside_range_rows;
};

inline EmbedResult embed(const TabularData& data, const EmbedConfig& config) {
  EmbedResult result{data, select_key_cells(data, config), {}};
  Column& col = result.watermarked.column(config.attribute);
  const WatermarkKey& key = result.key;

  if (col.is_numeric()) {
    auto& values = col.mutable_numbers();
    const auto [lo, hi] = data.column(config.attribute).range();
    for (const auto& cell : key.cells) {
      const auto partition = partition_numeric(cell.seed, key.params);
      CounterRng rng(cell.seed.value, Stream::kNoise);
      const double original = values[cell.row];
      // o + delta is rounded; redraw in the (astronomically rare) case the
      // stored difference no longer lands in green.
      double perturbed = original;
      for (int attempt = 0;; ++attempt) {
        double delta;
        try {
          delta = key.noise.kind == NoiseKind::kUniform ? sample_green_uniform(rng, partition)
                                                        : sample_green_truncnormal(rng, partition, key.noise.sigma_t);
        } catch (const SamplingError& e) {
          throw SamplingError("embed: key cell at row " + std::to_string(cell.row) + ": " + e.what());
        }
        perturbed = original + delta;
        if (partition.classify(perturbed - original) == Domain::kGreen) break;
        if (attempt > 1000)
          throw SamplingError("embed: key cell at row " + std::to_string(cell.row) +
                              " cannot hold a green deviation at this magnitude");
      }
      values[cell.row] = perturbed;
      if (perturbed < lo || perturbed > hi) result.outside_range_rows.push_back(cell.row);
    }
  } else {
    auto& tokens = col.mutable_tokens();
    for (const auto& cell : key.cells) {
      const auto partition = partition_categorical(cell.seed, key.category_order, key.params.gamma);
      tokens[cell.row] = draw_green_category(cell.seed, partition);
    }
  }
  return result;
}

/// p = 2 * sample standard deviation of the column.
inline double suggest_p(const Column& column) {
  if (!column.is_numeric()) throw ConfigError("suggest_p: column '" + column.name() + "' is not numeric");
  std::vector<double> xs;
  for (double v : column.numbers())
    if (!std::isnan(v)) xs.push_back(v);
  if (xs.size() < 2) throw ConfigError("suggest_p: need at least two values");
  return 2.0 * stats::stddev(xs);
}

// ---------------------------------------------------------------------------
// Key file

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson key_to_json(const WatermarkKey& key) {
  OrderedJson j;
  j["version"] = key.version;
  j["generator_id"] = key.generator_id;
  j["attribute"] = key.attribute;
  j["kind"] = std::string(to_string(key.kind));
  if (key.kind == ColumnKind::kNumeric) {
    j["p"] = key.params.p;
    j["k"] = key.params.k;
  } else {
    j["p"] = nullptr;
    j["k"] = nullptr;
  }
  j["gamma"] = key.params.gamma;
  j["noise_model"] = key.noise.kind == NoiseKind::kUniform ? "uniform" : "truncated_normal";
  if (key.noise.kind == NoiseKind::kTruncatedNormal) j["sigma_t"] = key.noise.sigma_t;
  j["match_attributes"] = key.match_attributes;
  OrderedJson cells = OrderedJson::array();
  for (const auto& c : key.cells) {
    OrderedJson cell;
    cell["row"] = c.row;
    cell["seed"] = std::to_string(c.seed.value);
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  if (key.kind == ColumnKind::kCategorical) j["category_order"] = key.category_order;
  if (!key.created.empty()) j["created"] = key.created;
  return j;
}

namespace detail {

inline std::uint64_t parse_seed(const nlohmann::ordered_json& v) {
  if (!v.is_string()) throw ConfigError("key: seed must be an unsigned decimal string");
  const auto& s = v.get_ref<const std::string&>();
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("key: invalid seed '" + s + "'");
  return out;
}

}  // namespace detail

inline WatermarkKey key_from_json(const OrderedJson& j) {
  try {
    WatermarkKey key;
    key.version = j.at("version").get<int>();
    key.generator_id = j.at("generator_id").get<std::string>();
    key.attribute = j.at("attribute").get<std::string>();
    key.kind = parse_column_kind(j.at("kind").get<std::string>());
    if (key.kind == ColumnKind::kNumeric) {
      key.params.p = j.at("p").get<double>();
      key.params.k = j.at("k").get<int>();
    }
    key.params.gamma = j.at("gamma").get<double>();
    const auto noise = j.at("noise_model").get<std::string>();
    if (noise == "uniform") {
      key.noise = NoiseModel::uniform();
    } else if (noise == "truncated_normal") {
      key.noise = NoiseModel::truncated_normal(j.at("sigma_t").get<double>());
    } else {
      throw ConfigError("key: unknown noise_model '" + noise + "'");
    }
    key.match_attributes = j.at("match_attributes").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
      key.cells.push_back({c.at("row").get<std::size_t>(), CellSeed{detail::parse_seed(c.at("seed"))}});
    }
    if (key.kind == ColumnKind::kCategorical)
      key.category_order = j.at("category_order").get<std::vector<std::string>>();
    if (j.contains("created")) key.created = j.at("created").get<std::string>();
    key.validate();
    return key;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("key: malformed key file: ") + e.what());
  }
}

inline void save_key(const WatermarkKey& key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << key_to_json(key).dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline WatermarkKey load_key(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  OrderedJson j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("key: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return key_from_json(j);
}

}  // namespace tabmark
