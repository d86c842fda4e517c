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

// In-memory table of typed columns plus RFC-4180 CSV I/O.
//
// Numeric cells are doubles, a missing numeric cell is NaN. Categorical cells
// are opaque tokens, a missing categorical cell is the empty string. Numbers
// are written in shortest round-trip form so that save/load is exact.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "tabmark/error.hpp"

namespace tabmark {

enum class ColumnKind { kNumeric, kCategorical };

constexpr std::string_view to_string(ColumnKind kind) noexcept {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

inline ColumnKind parse_column_kind(std::string_view text) {
  if (text == "numeric") return ColumnKind::kNumeric;
  if (text == "categorical") return ColumnKind::kCategorical;
  throw ConfigError("unknown column kind '" + std::string(text) + "'");
}

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Parses a whole cell as a finite decimal number. Rejects "inf"/"nan",
/// surrounding whitespace and trailing garbage.
inline bool parse_number(std::string_view cell, double& out) noexcept {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

class Column {
 public:
  Column(std::string name, std::vector<double> numbers)
      : name_(std::move(name)), kind_(ColumnKind::kNumeric), numbers_(std::move(numbers)) {}

  Column(std::string name, std::vector<std::string> tokens)
      : name_(std::move(name)), kind_(ColumnKind::kCategorical), tokens_(std::move(tokens)) {}

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ColumnKind::kNumeric; }

  std::size_t size() const noexcept { return is_numeric() ? numbers_.size() : tokens_.size(); }

  bool is_missing(std::size_t row) const {
    return is_numeric() ? std::isnan(numbers_.at(row)) : tokens_.at(row).empty();
  }

  std::span<const double> numbers() const noexcept { return numbers_; }
  std::span<const std::string> tokens() const noexcept { return tokens_; }
  std::vector<double>& mutable_numbers() noexcept { return numbers_; }
  std::vector<std::string>& mutable_tokens() noexcept { return tokens_; }

  double number(std::size_t row) const { return numbers_.at(row); }
  const std::string& token(std::size_t row) const { return tokens_.at(row); }

  /// Cell as CSV text (before quoting). Missing cells are empty.
  std::string text(std::size_t row) const {
    if (!is_numeric()) return tokens_.at(row);
    const double v = numbers_.at(row);
    return std::isnan(v) ? std::string() : format_number(v);
  }

  /// Sorted distinct non-missing tokens. Independent of row order.
  std::vector<std::string> categories() const {
    std::vector<std::string> out;
    for (const auto& t : tokens_)
      if (!t.empty()) out.push_back(t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// min/max over non-missing numeric cells; {NaN, NaN} when all missing.
  std::pair<double, double> range() const {
    double lo = kMissing, hi = kMissing;
    for (double v : numbers_) {
      if (std::isnan(v)) continue;
      if (std::isnan(lo) || v < lo) lo = v;
      if (std::isnan(hi) || v > hi) hi = v;
    }
    return {lo, hi};
  }

  Column select(std::span<const std::size_t> rows) const {
    if (is_numeric()) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (auto r : rows) out.push_back(numbers_.at(r));
      return Column(name_, std::move(out));
    }
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(tokens_.at(r));
    return Column(name_, std::move(out));
  }

  /// Bitwise equality; missing equals missing.
  friend bool operator==(const Column& a, const Column& b) {
    if (a.name_ != b.name_ || a.kind_ != b.kind_) return false;
    if (!a.is_numeric()) return a.tokens_ == b.tokens_;
    if (a.numbers_.size() != b.numbers_.size()) return false;
    for (std::size_t i = 0; i < a.numbers_.size(); ++i) {
      const double x = a.numbers_[i], y = b.numbers_[i];
      if (std::isnan(x) != std::isnan(y)) return false;
      if (!std::isnan(x) && std::bit_cast<std::uint64_t>(x) != std::bit_cast<std::uint64_t>(y)) return false;
    }
    return true;
  }

 private:
  std::string name_;
  ColumnKind kind_;
  std::vector<double> numbers_;
  std::vector<std::string> tokens_;
};

class TabularData {
 public:
  TabularData() = default;

  explicit TabularData(std::vector<Column> columns) {
    for (auto& c : columns) add_column(std::move(c));
  }

  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  std::span<const Column> columns() const noexcept { return columns_; }

  void add_column(Column column) {
    if (find(column.name()) != nullptr) throw ConfigError("duplicate column name '" + column.name() + "'");
    if (columns_.empty()) {
      rows_ = column.size();
    } else if (column.size() != rows_) {
      throw ConfigError("column '" + column.name() + "' has " + std::to_string(column.size()) +
                        " values, table has " + std::to_string(rows_) + " rows");
    }
    columns_.push_back(std::move(column));
  }

  const Column* find(std::string_view name) const noexcept {
    for (const auto& c : columns_)
      if (c.name() == name) return &c;
    return nullptr;
  }

  Column* find(std::string_view name) noexcept {
    for (auto& c : columns_)
      if (c.name() == name) return &c;
    return nullptr;
  }

  const Column& column(std::string_view name) const {
    if (const auto* c = find(name)) return *c;
    throw ConfigError("no column named '" + std::string(name) + "'");
  }

  Column& column(std::string_view name) {
    if (auto* c = find(name)) return *c;
    throw ConfigError("no column named '" + std::string(name) + "'");
  }

  /// New table holding `rows` (any order, repeats allowed).
  TabularData select_rows(std::span<const std::size_t> rows) const {
    TabularData out;
    for (const auto& c : columns_) out.add_column(c.select(rows));
    if (columns_.empty()) out.rows_ = 0;
    return out;
  }

  friend bool operator==(const TabularData& a, const TabularData& b) {
    return a.rows_ == b.rows_ && a.columns_ == b.columns_;
  }

 private:
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Column-kind overrides for load_csv, keyed by column name.
using SchemaOverrides = std::map<std::string, ColumnKind, std::less<>>;

namespace detail {

struct CsvRecord {
  std::vector<std::string> cells;
  std::size_t line = 0;
};

inline std::vector<CsvRecord> split_csv(std::string_view text, std::string_view source) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string cell;
  std::size_t line = 1;
  current.line = 1;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  std::size_t i = 0;

  auto end_cell = [&] {
    current.cells.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_record = [&] {
    end_cell();
    records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  if (text.starts_with("\xEF\xBB\xBF")) i = 3;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        cell.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!cell.empty() || cell_was_quoted)
          throw ParseError(std::string(source) + ":" + std::to_string(line) + ": stray quote inside unquoted cell");
        in_quotes = true;
        cell_was_quoted = true;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        ++line;
        end_record();
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        if (cell_was_quoted)
          throw ParseError(std::string(source) + ":" + std::to_string(line) + ": text after closing quote");
        cell.push_back(ch);
    }
  }
  if (in_quotes) throw ParseError(std::string(source) + ": unterminated quoted cell");
  // Final record without trailing newline.
  if (!cell.empty() || cell_was_quoted || !current.cells.empty()) end_record();
  return records;
}

inline void append_csv_cell(std::string& out, std::string_view cell) {
  const bool quote = cell.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) {
    out.append(cell);
    return;
  }
  out.push_back('"');
  for (char ch : cell) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
}

}  // namespace detail

/// Parses CSV text. A column is numeric iff every non-empty cell parses as a
/// finite number; `overrides` win over inference.
inline TabularData parse_csv(std::string_view text, const SchemaOverrides& overrides = {},
                             std::string_view source = "<memory>") {
  auto records = detail::split_csv(text, source);
  if (records.empty()) throw ParseError(std::string(source) + ": missing header row");
  const auto& header = records.front().cells;
  const std::size_t width = header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].cells.size() != width)
      throw ParseError(std::string(source) + ":" + std::to_string(records[r].line) + ": row has " +
                       std::to_string(records[r].cells.size()) + " cells, header has " + std::to_string(width));
  }
  for (const auto& [name, kind] : overrides) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw ParseError(std::string(source) + ": schema override names unknown column '" + name + "'");
  }

  TabularData table;
  const std::size_t rows = records.size() - 1;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string& name = header[c];
    ColumnKind kind = ColumnKind::kNumeric;
    if (auto it = overrides.find(name); it != overrides.end()) {
      kind = it->second;
    } else {
      double scratch = 0;
      for (std::size_t r = 1; r <= rows; ++r) {
        const auto& cell = records[r].cells[c];
        if (!cell.empty() && !parse_number(cell, scratch)) {
          kind = ColumnKind::kCategorical;
          break;
        }
      }
    }
    if (kind == ColumnKind::kNumeric) {
      std::vector<double> values(rows, kMissing);
      for (std::size_t r = 1; r <= rows; ++r) {
        const auto& cell = records[r].cells[c];
        if (cell.empty()) continue;
        if (!parse_number(cell, values[r - 1]))
          throw ParseError(std::string(source) + ":" + std::to_string(records[r].line) + ": column '" + name +
                           "': cannot parse '" + cell + "' as a number");
      }
      table.add_column(Column(name, std::move(values)));
    } else {
      std::vector<std::string> values;
      values.reserve(rows);
      for (std::size_t r = 1; r <= rows; ++r) values.push_back(std::move(records[r].cells[c]));
      table.add_column(Column(name, std::move(values)));
    }
  }
  return table;
}

inline TabularData load_csv(const std::filesystem::path& path, const SchemaOverrides& overrides = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return parse_csv(buf.str(), overrides, path.string());
}

/// LF line endings; cells quoted only when they contain a delimiter, quote or
/// line break.
inline std::string to_csv(const TabularData& data) {
  std::string out;
  const auto cols = data.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out.push_back(',');
    detail::append_csv_cell(out, cols[c].name());
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < data.row_count(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out.push_back(',');
      detail::append_csv_cell(out, cols[c].text(r));
    }
    out.push_back('\n');
  }
  return out;
}

inline void save_csv(const TabularData& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto text = to_csv(data);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

/// Schema-level overrides that make a reload reproduce `data`'s kinds exactly.
inline SchemaOverrides schema_of(const TabularData& data) {
  SchemaOverrides out;
  for (const auto& c : data.columns()) out.emplace(c.name(), c.kind());
  return out;
}

}  // namespace tabmark
