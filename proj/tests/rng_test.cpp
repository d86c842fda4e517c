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
#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "tabmark/rng.hpp"

namespace {

using tabmark::CounterRng;
using tabmark::Stream;

// Reference splitmix64 output for seed 0 (first value of the classic
// sequential generator equals mix64(G)).
TEST(Rng, MixMatchesSplitmix64Reference) {
  EXPECT_EQ(tabmark::detail::mix64(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, DeterministicPerSeedAndStream) {
  CounterRng a(42, Stream::kNoise), b(42, Stream::kNoise), c(42, Stream::kPartition), d(43, Stream::kNoise);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
    EXPECT_NE(x, d.next());
  }
  EXPECT_EQ(a.position(), 100u);
}

TEST(Rng, Uniform01InUnitInterval) {
  CounterRng r(7);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Rng, BelowIsUniform) {
  CounterRng r(9);
  std::vector<double> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const auto v = r.below(10);
    ASSERT_LT(v, 10u);
    counts[v] += 1;
  }
  EXPECT_TRUE(oracle::chi_square_uniform_counts(counts, 0.01).pass());
}

TEST(Rng, NormalMoments) {
  CounterRng r(11);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(3.0, 2.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 3.0, 0.02);
  EXPECT_NEAR(var, 4.0, 0.05);
}

TEST(Rng, LaplaceMoments) {
  CounterRng r(12);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.laplace(1.5);
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 2 * 1.5 * 1.5, 0.1);
}

TEST(Rng, ShuffleIsPermutation) {
  CounterRng r(13);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  auto w = v;
  r.shuffle(std::span<int>(w));
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Rng, SampleIndicesDistinct) {
  CounterRng r(14);
  const auto s = r.sample_indices(50, 20);
  ASSERT_EQ(s.size(), 20u);
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 20u);
  for (auto i : s) EXPECT_LT(i, 50u);
  EXPECT_EQ(r.sample_indices(5, 10).size(), 5u);
}

TEST(Rng, DeriveSeedSeparatesChildren) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(tabmark::derive_seed(1, a, b));
  EXPECT_EQ(seen.size(), 2500u);
  static_assert(tabmark::derive_seed(1, 2, 3) == tabmark::derive_seed(1, 2, 3));
}

}  // namespace
