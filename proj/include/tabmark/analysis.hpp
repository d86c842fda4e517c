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

// Closed-form cost of removing the watermark by random alteration.
//
// An attacker who cannot see the key cells tampers with n_h random cells of
// the n-cell attribute. A tampered green cell turns red with probability
// p_sigma, which depends on the attacker's noise family. Detection fails once
// fewer than n_alpha key cells stay green.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabmark/error.hpp"
#include "tabmark/stats.hpp"

namespace tabmark::analysis {

enum class AttackerNoise { kUniform, kGaussian, kLaplace };

inline AttackerNoise parse_attacker_noise(std::string_view s) {
  if (s == "uniform") return AttackerNoise::kUniform;
  if (s == "gaussian") return AttackerNoise::kGaussian;
  if (s == "laplace") return AttackerNoise::kLaplace;
  throw ConfigError("unknown attacker noise '" + std::string(s) + "'");
}

constexpr std::string_view to_string(AttackerNoise n) noexcept {
  switch (n) {
    case AttackerNoise::kUniform:
      return "uniform";
    case AttackerNoise::kGaussian:
      return "gaussian";
    case AttackerNoise::kLaplace:
      return "laplace";
  }
  return "?";
}

namespace detail {

inline void check_psigma_inputs(double p, int k, double sigma) {
  if (!(p >= 0 && std::isfinite(p))) throw ConfigError("p_sigma: p must be finite and non-negative");
  if (k < 1) throw ConfigError("p_sigma: k must be positive");
  if (!(sigma > 0)) throw ConfigError("p_sigma: sigma must be positive");
}

}  // namespace detail

/// Noise U[-2 sigma, 2 sigma]: 0.5 - p/(4 k sigma). Only valid for
/// sigma >= p/k, where the noise always reaches past a unit domain.
inline double p_sigma_uniform(double p, int k, double sigma) {
  detail::check_psigma_inputs(p, k, sigma);
  if (sigma < p / k)
    throw ConfigError("p_sigma_uniform: requires sigma >= p/k (noise must span a unit domain); got sigma = " +
                      std::to_string(sigma) + ", p/k = " + std::to_string(p / k));
  return 0.5 - p / (4.0 * k * sigma);
}

/// Noise N(0, sigma^2): 1/4 + Q(2p/(k sigma))/2.
inline double p_sigma_gaussian(double p, int k, double sigma) {
  detail::check_psigma_inputs(p, k, sigma);
  return 0.25 + 0.5 * stats::normal_upper_tail(2.0 * p / (k * sigma));
}

/// Noise Lap(0, sigma/sqrt 2): (1 + exp(-sqrt2 p/(k sigma)))/4.
inline double p_sigma_laplace(double p, int k, double sigma) {
  detail::check_psigma_inputs(p, k, sigma);
  return 0.25 * (1.0 + std::exp(-std::numbers::sqrt2 * p / (k * sigma)));
}

inline double p_sigma(AttackerNoise noise, double p, int k, double sigma) {
  switch (noise) {
    case AttackerNoise::kUniform:
      return p_sigma_uniform(p, k, sigma);
    case AttackerNoise::kGaussian:
      return p_sigma_gaussian(p, k, sigma);
    case AttackerNoise::kLaplace:
      return p_sigma_laplace(p, k, sigma);
  }
  throw ConfigError("p_sigma: unknown noise");
}

/// Least green count keeping z >= alpha: alpha sqrt(n_w / 4) + n_w / 2.
inline double n_alpha(double alpha, std::size_t n_w) {
  const double nw = static_cast<double>(n_w);
  return alpha * std::sqrt(nw / 4.0) + nw / 2.0;
}

struct RemovalCost {
  double n_alpha = 0;
  double expected_n_h = 0;
};

/// E[n_h] = n (n_w - n_alpha) / (n_w p_sigma) for a given n_alpha.
inline RemovalCost expected_removal_cost_for(std::size_t n, std::size_t n_w, double n_alpha_value, double p_sigma) {
  if (n_w == 0) throw ConfigError("removal cost: n_w must be positive");
  if (n < n_w) throw ConfigError("removal cost: n must be at least n_w");
  if (!(p_sigma > 0 && p_sigma <= 0.5)) throw ConfigError("removal cost: p_sigma must lie in (0, 0.5]");
  const double nw = static_cast<double>(n_w);
  if (n_alpha_value >= nw)
    throw ConfigError("removal cost: n_alpha = " + std::to_string(n_alpha_value) + " >= n_w = " + std::to_string(n_w) +
                      ", the detection threshold is unreachable even on an untouched watermark");
  return {n_alpha_value, static_cast<double>(n) * (nw - n_alpha_value) / (nw * p_sigma)};
}

inline RemovalCost expected_removal_cost(std::size_t n, std::size_t n_w, double alpha, double p_sigma) {
  return expected_removal_cost_for(n, n_w, n_alpha(alpha, n_w), p_sigma);
}

inline constexpr std::size_t kConfidenceBoundMaxCells = 1000;

namespace detail {

inline double log_sum_exp(double a, double b) noexcept {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace detail

/// Lower bound on n_h needed to remove the watermark at the given confidence:
///
///   n_w + [ (n-n_w)! / ((1-c) n!) * S ]^(-1/n_w)
///   S = sum_{x=0}^{n_w-n_alpha} sum_{y=x}^{n_w} C(y,x) C(n_w,y) ps^x (1-ps)^(y-x)
///
/// evaluated entirely in log space; the factorial ratio is the negated sum
/// of log(n - i) for i < n_w.
inline double confidence_bound_n_h(std::size_t n, std::size_t n_w, std::size_t n_alpha_floor, double p_sigma,
                                   double confidence = 0.95) {
  if (n_w == 0) throw ConfigError("confidence bound: n_w must be positive");
  if (n_w > kConfidenceBoundMaxCells)
    throw ConfigError("confidence bound: n_w = " + std::to_string(n_w) + " exceeds the supported maximum of " +
                      std::to_string(kConfidenceBoundMaxCells));
  if (n < n_w) throw ConfigError("confidence bound: n must be at least n_w");
  if (n_alpha_floor > n_w) throw ConfigError("confidence bound: n_alpha exceeds n_w");
  if (!(p_sigma > 0 && p_sigma < 1)) throw ConfigError("confidence bound: p_sigma must lie in (0, 1)");
  if (!(confidence > 0 && confidence < 1)) throw ConfigError("confidence bound: confidence must lie in (0, 1)");

  std::vector<double> log_fact(n_w + 1, 0.0);
  for (std::size_t i = 1; i <= n_w; ++i) log_fact[i] = log_fact[i - 1] + std::log(static_cast<double>(i));
  auto log_choose = [&](std::size_t a, std::size_t b) { return log_fact[a] - log_fact[b] - log_fact[a - b]; };

  const double log_p = std::log(p_sigma);
  const double log_q = std::log1p(-p_sigma);
  double log_s = -INFINITY;
  for (std::size_t x = 0; x <= n_w - n_alpha_floor; ++x) {
    for (std::size_t y = x; y <= n_w; ++y) {
      const double term = log_choose(y, x) + log_choose(n_w, y) + static_cast<double>(x) * log_p +
                          static_cast<double>(y - x) * log_q;
      log_s = detail::log_sum_exp(log_s, term);
    }
  }

  double log_ratio = 0;
  for (std::size_t i = 0; i < n_w; ++i) log_ratio -= std::log(static_cast<double>(n - i));

  const double log_bracket = log_ratio - std::log1p(-confidence) + log_s;
  const double bound = static_cast<double>(n_w) + std::exp(-log_bracket / static_cast<double>(n_w));
  if (!std::isfinite(bound) || !std::isfinite(log_bracket))
    throw ConfigError("confidence bound: non-finite result for these parameters");
  return bound;
}

struct CostInputs {
  std::size_t n = 0;
  std::size_t n_w = 0;
  double alpha = 1.96;
  double p = 0;
  int k = 500;
  double sigma = 1;
  AttackerNoise noise = AttackerNoise::kUniform;
  double confidence = 0.95;
};

struct RemovalCostEstimate {
  CostInputs inputs;
  double p_sigma = 0;
  double n_alpha = 0;
  double expected_n_h = 0;
  std::optional<double> confidence_bound_n_h;
  std::string bound_unavailable_reason;
  /// The bound relies on n_h being small relative to n; set when it is not.
  bool bound_beyond_half_n = false;
};

inline RemovalCostEstimate estimate_removal_cost(const CostInputs& in, bool with_confidence_bound = true) {
  RemovalCostEstimate est;
  est.inputs = in;
  est.p_sigma = p_sigma(in.noise, in.p, in.k, in.sigma);
  const auto cost = expected_removal_cost(in.n, in.n_w, in.alpha, est.p_sigma);
  est.n_alpha = cost.n_alpha;
  est.expected_n_h = cost.expected_n_h;
  if (!with_confidence_bound) {
    est.bound_unavailable_reason = "not requested";
    return est;
  }
  try {
    const double floored = std::floor(est.n_alpha);
    if (floored < 0) throw ConfigError("confidence bound: n_alpha is negative");
    est.confidence_bound_n_h =
        confidence_bound_n_h(in.n, in.n_w, static_cast<std::size_t>(floored), est.p_sigma, in.confidence);
    est.bound_beyond_half_n = *est.confidence_bound_n_h > static_cast<double>(in.n) / 2.0;
  } catch (const ConfigError& e) {
    est.bound_unavailable_reason = e.what();
  }
  return est;
}

inline nlohmann::ordered_json estimate_to_json(const RemovalCostEstimate& e) {
  nlohmann::ordered_json j;
  j["noise_model"] = std::string(to_string(e.inputs.noise));
  j["p_sigma"] = e.p_sigma;
  j["n_alpha"] = e.n_alpha;
  j["expected_n_h"] = e.expected_n_h;
  if (e.confidence_bound_n_h) {
    j["confidence_bound_n_h"] = *e.confidence_bound_n_h;
    j["bound_beyond_half_n"] = e.bound_beyond_half_n;
  } else {
    j["confidence_bound_n_h"] = "unavailable";
    j["bound_unavailable_reason"] = e.bound_unavailable_reason;
  }
  nlohmann::ordered_json in;
  in["n"] = e.inputs.n;
  in["n_w"] = e.inputs.n_w;
  in["p"] = e.inputs.p;
  in["k"] = e.inputs.k;
  in["sigma"] = e.inputs.sigma;
  in["alpha"] = e.inputs.alpha;
  in["confidence"] = e.inputs.confidence;
  j["inputs"] = std::move(in);
  return j;
}

}  // namespace tabmark::analysis
