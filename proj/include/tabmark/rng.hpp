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

// Counter-based pseudo-random stream used for every secret decision the
// watermark makes. Everything a key file depends on goes through this header,
// so the algorithm is pinned here and identified by kGeneratorId.
//
// Algorithm "splitmix64-ctr/1":
//
//   mix(z)   = splitmix64 finalizer (Stafford variant 13)
//   key      = mix(seed + G * (stream + 1))
//   out[i]   = mix(key + G * (i + 1))      i = 0, 1, 2, ...
//
// with G = 0x9E3779B97F4A7C15. Derived quantities:
//
//   uniform01()  = (out >> 11) * 2^-53                      in [0, 1)
//   below(n)     = Lemire multiply-shift with rejection      in [0, n)
//   normal()     = Box-Muller, cosine branch, one draw pair per sample
//   laplace(b)   = inverse CDF from one uniform
//
// No std:: distribution is used: their algorithms are implementation defined
// and would make keys non-portable across standard libraries.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace tabmark {

inline constexpr std::string_view kGeneratorId = "splitmix64-ctr/1";

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

__extension__ using uint128 = unsigned __int128;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stream identifiers. A cell seed drives two independent streams so that
/// partition reconstruction never depends on how noise was drawn.
enum class Stream : std::uint64_t {
  kPartition = 0,
  kNoise = 1,
  kKeySelection = 2,
  kAttack = 3,
  kSynth = 4,
  kExperiment = 5,
};

class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t seed, Stream stream = Stream::kPartition) noexcept
      : key_(detail::mix64(seed + detail::kGolden * (static_cast<std::uint64_t>(stream) + 1))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return next(); }

  constexpr std::uint64_t next() noexcept {
    ++counter_;
    return detail::mix64(key_ + detail::kGolden * counter_);
  }

  /// Number of 64-bit words consumed so far.
  constexpr std::uint64_t position() const noexcept { return counter_; }

  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    detail::uint128 m = static_cast<detail::uint128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<detail::uint128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  /// Laplace(0, scale).
  double laplace(double scale) noexcept {
    for (;;) {
      const double u = uniform01() - 0.5;  // [-0.5, 0.5)
      const double tail = 1.0 - 2.0 * std::fabs(u);
      if (tail > 0.0) return (u < 0 ? scale : -scale) * std::log(tail);
    }
  }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// m distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < m && i < n; ++i) {
      const auto j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m < n ? m : n);
    return pool;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Deterministic child seed, for fanning one experiment seed out to trials.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return detail::mix64(detail::mix64(parent + detail::kGolden * (a + 1)) ^ (b * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

}  // namespace tabmark
