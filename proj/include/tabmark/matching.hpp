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

// Re-locating key rows in a suspicious table through composite keys built
// from the most significant decimal digit, sign and order of magnitude of a
// few match attributes.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "tabmark/embed.hpp"
#include "tabmark/error.hpp"
#include "tabmark/tabular.hpp"

namespace tabmark {

/// Sign, leading decimal digit and decimal exponent. Zero is (0, 0, 0).
struct NumericMsb {
  int sign = 0;
  int digit = 0;
  int exponent = 0;
  friend bool operator==(const NumericMsb&, const NumericMsb&) = default;
};

/// Taken from the shortest round-trip scientific representation, so two
/// doubles that print the same always agree and no log10 rounding leaks in.
inline NumericMsb numeric_msb(double value) {
  if (!std::isfinite(value)) throw ConfigError("msb: non-finite value");
  if (value == 0.0) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  std::string_view text(buf, static_cast<std::size_t>(ptr - buf));
  NumericMsb out;
  out.sign = value < 0 ? -1 : 1;
  if (text.front() == '-') text.remove_prefix(1);
  out.digit = text.front() - '0';
  const auto e = text.find('e');
  std::string_view exp_text = text.substr(e + 1);
  if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
  std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), out.exponent);
  return out;
}

using MsbPart = std::variant<NumericMsb, std::string>;

struct MsbKey {
  std::vector<MsbPart> parts;

  friend bool operator==(const MsbKey&, const MsbKey&) = default;

  /// Injective text form, used as the hash-index key.
  std::string encode() const {
    std::string out;
    for (const auto& part : parts) {
      if (const auto* n = std::get_if<NumericMsb>(&part)) {
        out += 'n';
        out += std::to_string(n->sign);
        out += ':';
        out += std::to_string(n->digit);
        out += ':';
        out += std::to_string(n->exponent);
      } else {
        const auto& t = std::get<std::string>(part);
        out += 't';
        out += std::to_string(t.size());
        out += ':';
        out += t;
      }
      out += '|';
    }
    return out;
  }
};

inline MsbKey msb_key(const TabularData& data, std::size_t row, std::span<const std::string> attributes) {
  MsbKey key;
  key.parts.reserve(attributes.size());
  for (const auto& name : attributes) {
    const Column& col = data.column(name);
    if (col.is_missing(row))
      throw ConfigError("msb: missing cell in match attribute '" + name + "' at row " + std::to_string(row));
    if (col.is_numeric()) {
      key.parts.emplace_back(numeric_msb(col.number(row)));
    } else {
      key.parts.emplace_back(col.token(row));
    }
  }
  return key;
}

struct MatchPair {
  std::size_t original_row = 0;
  std::optional<std::size_t> suspicious_row;
  std::size_t ambiguity_count = 0;  // suspicious rows sharing the MsbKey
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // one per key cell, ascending original row

  std::size_t matched_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : pairs) n += p.suspicious_row.has_value();
    return n;
  }
};

namespace detail {

inline void check_match_schema(const TabularData& original, const TabularData& suspicious,
                               std::span<const std::string> attributes) {
  for (const auto& name : attributes) {
    const Column& a = original.column(name);
    const Column* b = suspicious.find(name);
    if (b == nullptr) throw DetectionError("match: suspicious table lacks match attribute '" + name + "'");
    if (a.kind() != b->kind())
      throw DetectionError("match: attribute '" + name + "' is " + std::string(to_string(a.kind())) +
                           " in the original but " + std::string(to_string(b->kind())) + " in the suspicious table");
  }
}

/// Sum of per-attribute distances; numeric |a-b|/(1+|a|), categorical 0/1.
inline double match_distance(const TabularData& original, std::size_t row_o, const TabularData& suspicious,
                             std::size_t row_s, std::span<const std::string> attributes) {
  double d = 0;
  for (const auto& name : attributes) {
    const Column& a = original.column(name);
    const Column& b = suspicious.column(name);
    if (a.is_numeric()) {
      const double x = a.number(row_o), y = b.number(row_s);
      d += std::fabs(x - y) / (1.0 + std::fabs(x));
    } else {
      d += a.token(row_o) == b.token(row_s) ? 0.0 : 1.0;
    }
  }
  return d;
}

}  // namespace detail

/// Greedy assignment in ascending D_o key-row order. Among unclaimed
/// suspicious rows with an equal MsbKey, the closest (then the lowest index)
/// wins. Suspicious rows with a missing match cell are never candidates.
inline MatchResult match_rows(const TabularData& original, const TabularData& suspicious, const WatermarkKey& key) {
  const auto& attrs = key.match_attributes;
  detail::check_match_schema(original, suspicious, attrs);

  std::unordered_map<std::string, std::vector<std::size_t>> index;
  index.reserve(suspicious.row_count());
  for (std::size_t r = 0; r < suspicious.row_count(); ++r) {
    bool complete = true;
    for (const auto& name : attrs) complete = complete && !suspicious.column(name).is_missing(r);
    if (!complete) continue;
    index[msb_key(suspicious, r, attrs).encode()].push_back(r);
  }

  MatchResult result;
  result.pairs.reserve(key.cells.size());
  std::unordered_set<std::size_t> claimed;
  for (const auto& cell : key.cells) {
    MatchPair pair{cell.row, std::nullopt, 0};
    const auto it = index.find(msb_key(original, cell.row, attrs).encode());
    if (it != index.end()) {
      pair.ambiguity_count = it->second.size();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t candidate : it->second) {
        if (claimed.contains(candidate)) continue;
        const double d = detail::match_distance(original, cell.row, suspicious, candidate, attrs);
        if (d < best) {
          best = d;
          pair.suspicious_row = candidate;
        }
      }
      if (pair.suspicious_row) claimed.insert(*pair.suspicious_row);
    }
    result.pairs.push_back(pair);
  }
  return result;
}

/// Rows whose MsbKey over `attributes` occurs exactly once in `data`.
inline std::vector<std::size_t> unique_key_rows(const TabularData& data, std::span<const std::string> attributes) {
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> keys;
  keys.reserve(data.row_count());
  for (std::size_t r = 0; r < data.row_count(); ++r) {
    keys.push_back(msb_key(data, r, attributes).encode());
    ++counts[keys.back()];
  }
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < data.row_count(); ++r)
    if (counts[keys[r]] == 1) out.push_back(r);
  return out;
}

}  // namespace tabmark
