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


#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tabmark/partition.hpp"

namespace {

using namespace tabmark;

PartitionParams params(double p, int k, double gamma = 0.5) {
  PartitionParams prm;
  prm.p = p;
  prm.k = k;
  prm.gamma = gamma;
  return prm;
}

TEST(Partition, TwoUnitsHaveTwoOutcomes) {
  std::set<bool> first_green;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const auto part = partition_numeric({s}, params(5, 2));
    const auto g = part.green_intervals();
    const auto r = part.red_intervals();
    ASSERT_EQ(g.size(), 1u);
    ASSERT_EQ(r.size(), 1u);
    const bool neg_green = g[0].lo == -5 && g[0].hi == 0;
    EXPECT_TRUE(neg_green || (g[0].lo == 0 && g[0].hi == 5));
    first_green.insert(neg_green);
  }
  EXPECT_EQ(first_green.size(), 2u);
}

TEST(Partition, Deterministic) {
  const auto a = partition_numeric({12345}, params(5, 500));
  const auto b = partition_numeric({12345}, params(5, 500));
  EXPECT_EQ(a.green_units(), b.green_units());
  EXPECT_NE(a.green_units(), partition_numeric({12346}, params(5, 500)).green_units());
}

TEST(Partition, InvalidParamsRejected) {
  EXPECT_THROW(partition_numeric({1}, params(0, 10)), ConfigError);
  EXPECT_THROW(partition_numeric({1}, params(-1, 10)), ConfigError);
  EXPECT_THROW(partition_numeric({1}, params(1, 1)), ConfigError);
  EXPECT_THROW(partition_numeric({1}, params(1, 10, 0.0)), ConfigError);
  EXPECT_THROW(partition_numeric({1}, params(1, 10, 1.0)), ConfigError);
  EXPECT_THROW(partition_numeric({1}, params(1, 10, 0.01)), ConfigError);  // round(0.1) = 0
  EXPECT_NO_THROW(partition_numeric({1}, params(1, 7, 0.5)));
}

// Coverage, disjointness, widths and green count over many (seed, params).
TEST(Partition, CoverageAndDisjointnessProperty) {
  const std::vector<PartitionParams> cases{params(5, 2),      params(5, 8),       params(40, 500),
                                           params(1e-3, 10),  params(1e6, 64, 0.25), params(3, 7, 0.5),
                                           params(0.1, 100, 0.7)};
  for (const auto& prm : cases) {
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto part = partition_numeric({s * 7919}, prm);
      auto all = part.green_intervals();
      const auto red = part.red_intervals();
      ASSERT_EQ(static_cast<int>(all.size()), prm.green_count());
      all.insert(all.end(), red.begin(), red.end());
      ASSERT_EQ(static_cast<int>(all.size()), prm.k);
      std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
      EXPECT_EQ(all.front().lo, -prm.p);
      EXPECT_EQ(all.back().hi, prm.p);
      for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_NEAR(all[i].width(), prm.unit_width(), 1e-9 * prm.p);
        if (i) {
          ASSERT_EQ(all[i - 1].hi, all[i].lo);  // no gap, no overlap
        }
      }
      EXPECT_NEAR(part.green_fraction(), static_cast<double>(prm.green_count()) / prm.k, 1e-15);
    }
  }
}

TEST(Partition, UnitFrequencyIsGamma) {
  const int k = 8, seeds = 10000;
  std::vector<double> counts(k, 0);
  for (int s = 0; s < seeds; ++s) {
    const auto part = partition_numeric({static_cast<std::uint64_t>(s)}, params(5, k));
    for (int u : part.green_units()) counts[u] += 1;
  }
  for (int u = 0; u < k; ++u) EXPECT_NEAR(counts[u] / seeds, 0.5, 0.02) << "unit " << u;
  EXPECT_TRUE(oracle::chi_square_uniform_counts(counts, 0.01).pass());
}

TEST(Partition, ClassifyMatchesLinearScanOnGrid) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto part = partition_numeric({s}, params(5, 8));
    const auto units = oracle::scan_units(part);
    for (int i = -100; i <= 100; ++i) {
      const double v = i * (5.0 / 80.0);
      ASSERT_EQ(part.classify(v), oracle::scan_classify(units, v)) << "seed " << s << " v " << v;
    }
  }
}

TEST(Partition, ClassifyBoundaries) {
  const auto part = partition_numeric({3}, params(5, 8));
  EXPECT_EQ(part.classify(6.0), Domain::kOutOfRange);
  EXPECT_EQ(part.classify(-5.0000001), Domain::kOutOfRange);
  EXPECT_EQ(part.unit_index(-5.0), 0);
  EXPECT_EQ(part.unit_index(5.0), 7);
  EXPECT_EQ(part.unit_index(std::nextafter(5.0, 0.0)), 7);
  EXPECT_EQ(part.unit_index(0.0), 4);
  EXPECT_EQ(part.unit_index(std::nextafter(0.0, -1.0)), 3);
  EXPECT_EQ(part.classify(NAN), Domain::kOutOfRange);
}

TEST(Partition, ClassifyAgreesWithBoundsEverywhere) {
  // Awkward widths where floor((v+p)/w) can land in the wrong unit.
  const auto part = partition_numeric({99}, params(0.3, 7));
  const auto units = oracle::scan_units(part);
  for (int i = 0; i <= part.unit_count(); ++i) {
    const double b = part.bound(i);
    for (double v : {std::nextafter(b, -1.0), b, std::nextafter(b, 1.0)})
      EXPECT_EQ(part.classify(v), oracle::scan_classify(units, v)) << v;
  }
}

TEST(CategoryPartition, TwoCategories) {
  const std::vector<std::string> cats{"0", "1"};
  std::set<std::string> greens;
  for (std::uint64_t s = 0; s < 32; ++s) {
    const auto part = partition_categorical({s}, cats, 0.5);
    ASSERT_EQ(part.green().size(), 1u);
    ASSERT_EQ(part.red().size(), 1u);
    EXPECT_NE(part.green()[0], part.red()[0]);
    greens.insert(part.green()[0]);
  }
  EXPECT_EQ(greens.size(), 2u);
}

TEST(CategoryPartition, SevenCategories) {
  const std::vector<std::string> cats{"0", "1", "2", "3", "4", "5", "6"};
  const auto part = partition_categorical({5}, cats, 0.5);
  EXPECT_EQ(part.green().size(), 3u);
  EXPECT_EQ(part.red().size(), 4u);
  std::set<std::string> all(part.green().begin(), part.green().end());
  all.insert(part.red().begin(), part.red().end());
  EXPECT_EQ(all.size(), 7u);
  EXPECT_EQ(part.classify("9"), Domain::kOutOfRange);
  EXPECT_NEAR(part.green_fraction(), 3.0 / 7.0, 1e-15);
}

TEST(CategoryPartition, FrequencyAndClamp) {
  const std::vector<std::string> cats{"a", "b", "c", "d"};
  std::vector<double> counts(4, 0);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto part = partition_categorical({s}, cats, 0.5);
    for (const auto& g : part.green()) counts[g[0] - 'a'] += 1;
  }
  for (double c : counts) EXPECT_NEAR(c / 10000, 0.5, 0.02);
  EXPECT_EQ(category_green_count(3, 0.1), 1u);
  EXPECT_EQ(category_green_count(3, 0.99), 2u);
  EXPECT_THROW(partition_categorical({1}, std::vector<std::string>{"only"}, 0.5), ConfigError);
}

}  // namespace
