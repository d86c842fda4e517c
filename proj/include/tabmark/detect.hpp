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

// Non-blind detection: rebuild each key cell's partition, count green cells
// in the suspicious table and run a one-proportion z-test.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabmark/embed.hpp"
#include "tabmark/error.hpp"
#include "tabmark/matching.hpp"
#include "tabmark/partition.hpp"
#include "tabmark/stats.hpp"
#include "tabmark/tabular.hpp"

namespace tabmark {

inline constexpr double kDefaultThreshold = 1.96;

enum class MatchMode { kByRowIndex, kByMsbKey };

enum class CellClass { kGreen, kRed, kOutOfRange, kUnmatched };

constexpr std::string_view to_string(CellClass c) noexcept {
  switch (c) {
    case CellClass::kGreen:
      return "green";
    case CellClass::kRed:
      return "red";
    case CellClass::kOutOfRange:
      return "out_of_range";
    case CellClass::kUnmatched:
      return "unmatched";
  }
  return "?";
}

struct CellOutcome {
  std::size_t original_row = 0;
  std::optional<std::size_t> suspicious_row;
  CellClass cls = CellClass::kUnmatched;
};

struct DetectionReport {
  std::size_t n_w_effective = 0;
  std::size_t n_g = 0;
  double gamma_eff = 0.5;
  double z = 0;
  double p_value = 1;
  double threshold = kDefaultThreshold;
  bool watermark_detected = false;
  std::vector<CellOutcome> per_cell;

  /// Fraction of tested key cells not green (all were green at embedding).
  double mismatch_fraction() const noexcept {
    return n_w_effective == 0 ? 0.0 : 1.0 - static_cast<double>(n_g) / static_cast<double>(n_w_effective);
  }
};

/// (n_g - gamma*n_w) / sqrt(n_w*gamma*(1-gamma)); at gamma = 0.5 this is
/// 2(n_g - 0.5 n_w)/sqrt(n_w).
inline double z_score(std::size_t n_g, std::size_t n_w, double gamma_eff) {
  if (n_w == 0) throw DetectionError("z_score: no key cells, no decision possible");
  if (n_g > n_w) throw DetectionError("z_score: n_g exceeds n_w");
  if (!(gamma_eff > 0 && gamma_eff < 1)) throw DetectionError("z_score: gamma must lie in (0, 1)");
  const double n = static_cast<double>(n_w);
  return (static_cast<double>(n_g) - gamma_eff * n) / std::sqrt(n * gamma_eff * (1.0 - gamma_eff));
}

/// One-sided p-value P(Z >= z).
inline double p_value_from_z(double z) noexcept { return stats::normal_upper_tail(z); }

struct DetectOptions {
  double threshold = kDefaultThreshold;
  MatchMode match_mode = MatchMode::kByRowIndex;
};

inline DetectionReport detect(const TabularData& original, const TabularData& suspicious, const WatermarkKey& key,
                              const DetectOptions& options = {}) {
  if (key.generator_id != kGeneratorId)
    throw DetectionError("detect: key uses unknown generator '" + key.generator_id + "'");
  key.validate(original.row_count());

  const Column* orig_col = original.find(key.attribute);
  if (orig_col == nullptr) throw DetectionError("detect: original table lacks attribute '" + key.attribute + "'");
  const Column* susp_col = suspicious.find(key.attribute);
  if (susp_col == nullptr) throw DetectionError("detect: suspicious table lacks attribute '" + key.attribute + "'");
  if (orig_col->kind() != key.kind || susp_col->kind() != key.kind)
    throw DetectionError("detect: attribute '" + key.attribute + "' must be " + std::string(to_string(key.kind)) +
                         " in both tables");

  std::vector<std::optional<std::size_t>> counterpart(key.cells.size());
  if (options.match_mode == MatchMode::kByRowIndex) {
    if (original.row_count() != suspicious.row_count())
      throw DetectionError("detect: by-row matching needs equal row counts (" + std::to_string(original.row_count()) +
                           " vs " + std::to_string(suspicious.row_count()) + ")");
    for (std::size_t i = 0; i < key.cells.size(); ++i) counterpart[i] = key.cells[i].row;
  } else {
    const auto matches = match_rows(original, suspicious, key);
    for (std::size_t i = 0; i < key.cells.size(); ++i) counterpart[i] = matches.pairs[i].suspicious_row;
  }

  DetectionReport report;
  report.threshold = options.threshold;
  report.per_cell.reserve(key.cells.size());
  double gamma_sum = 0;
  for (std::size_t i = 0; i < key.cells.size(); ++i) {
    const auto& cell = key.cells[i];
    CellOutcome outcome{cell.row, counterpart[i], CellClass::kUnmatched};
    if (!counterpart[i]) {
      report.per_cell.push_back(outcome);
      continue;
    }
    const std::size_t row_s = *counterpart[i];
    Domain domain = Domain::kOutOfRange;
    double gamma_cell = 0;
    if (key.kind == ColumnKind::kNumeric) {
      const auto partition = partition_numeric(cell.seed, key.params);
      gamma_cell = partition.green_fraction();
      const double o = orig_col->number(cell.row);
      if (std::isnan(o))
        throw DetectionError("detect: original key cell at row " + std::to_string(cell.row) + " is missing");
      const double s = susp_col->number(row_s);
      if (!std::isnan(s)) domain = partition.classify(s - o);
    } else {
      const auto partition = partition_categorical(cell.seed, key.category_order, key.params.gamma);
      gamma_cell = partition.green_fraction();
      const auto& s = susp_col->token(row_s);
      if (!s.empty()) domain = partition.classify(s);
    }
    gamma_sum += gamma_cell;
    ++report.n_w_effective;
    switch (domain) {
      case Domain::kGreen:
        outcome.cls = CellClass::kGreen;
        ++report.n_g;
        break;
      case Domain::kRed:
        outcome.cls = CellClass::kRed;
        break;
      case Domain::kOutOfRange:
        outcome.cls = CellClass::kOutOfRange;
        break;
    }
    report.per_cell.push_back(outcome);
  }

  if (report.n_w_effective == 0)
    throw DetectionError("detect: no key cell could be located in the suspicious table, no decision possible");
  report.gamma_eff = gamma_sum / static_cast<double>(report.n_w_effective);
  report.z = z_score(report.n_g, report.n_w_effective, report.gamma_eff);
  report.p_value = p_value_from_z(report.z);
  report.watermark_detected = report.z >= options.threshold;
  return report;
}

inline nlohmann::ordered_json report_to_json(const DetectionReport& r) {
  nlohmann::ordered_json j;
  j["n_w_effective"] = r.n_w_effective;
  j["n_g"] = r.n_g;
  j["z"] = r.z;
  j["threshold"] = r.threshold;
  j["detected"] = r.watermark_detected;
  j["p_value"] = r.p_value;
  j["gamma_eff"] = r.gamma_eff;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.per_cell) {
    nlohmann::ordered_json cell;
    cell["row"] = c.original_row;
    if (c.suspicious_row) {
      cell["matched_row"] = *c.suspicious_row;
    } else {
      cell["matched_row"] = nullptr;
    }
    cell["class"] = std::string(to_string(c.cls));
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

}  // namespace tabmark
