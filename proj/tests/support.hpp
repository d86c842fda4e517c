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

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabmark/tabmark.hpp"

namespace testing_support {

/// Synthetic table with dim0..dim3 and target where the MSB key over
/// dim1, dim2, dim3 is unique per row. Built by filtering a larger draw.
inline tabmark::TabularData unique_key_table(std::size_t rows, std::uint64_t seed) {
  const std::vector<std::string> attrs{"dim1", "dim2", "dim3"};
  for (std::size_t draw = rows * 2;; draw *= 2) {
    tabmark::SynthConfig sc;
    sc.rows = draw;
    sc.seed = seed;
    sc.extra_features = 2;
    const auto ds = tabmark::generate(sc);
    auto keep = tabmark::unique_key_rows(ds.table, attrs);
    if (keep.size() >= rows) {
      keep.resize(rows);
      return ds.table.select_rows(keep);
    }
  }
}

inline tabmark::EmbedConfig numeric_config(std::size_t n_cells = 300, double p = 40, std::uint64_t seed = 1) {
  tabmark::EmbedConfig c;
  c.attribute = "dim0";
  c.n_cells = n_cells;
  c.params.p = p;
  c.params.k = 500;
  c.match_attributes = {"dim1", "target"};
  c.master_seed = seed;
  return c;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tabmark_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
