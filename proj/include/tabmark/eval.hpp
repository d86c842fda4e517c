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

// Batch experiments: embed -> attack -> detect sweeps, false-positive
// estimation and ROC curves. Trials run on worker threads; every result is
// stored by (point, trial) index so output never depends on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tabmark/attacks.hpp"
#include "tabmark/detect.hpp"
#include "tabmark/embed.hpp"
#include "tabmark/error.hpp"
#include "tabmark/rng.hpp"
#include "tabmark/stats.hpp"
#include "tabmark/synth.hpp"
#include "tabmark/tabular.hpp"

namespace tabmark::eval {

inline constexpr std::size_t kDefaultTrials = 30;

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency) and rethrows the first exception after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

/// Table source for trials; called with a per-trial seed.
using DataSource = std::function<TabularData(std::uint64_t seed)>;

inline DataSource fixed_data(TabularData table) {
  auto shared = std::make_shared<const TabularData>(std::move(table));
  return [shared](std::uint64_t) { return *shared; };
}

inline DataSource synthetic_data(SynthConfig config) {
  return [config](std::uint64_t seed) mutable {
    auto c = config;
    c.seed = seed;
    return generate(c).table;
  };
}

enum class SweepAxis { kBeta, kP, kNumCells, kGamma };

inline SweepAxis parse_axis(std::string_view s) {
  if (s == "beta") return SweepAxis::kBeta;
  if (s == "p") return SweepAxis::kP;
  if (s == "n_w" || s == "n-cells" || s == "n_cells") return SweepAxis::kNumCells;
  if (s == "gamma") return SweepAxis::kGamma;
  throw ConfigError("unknown sweep axis '" + std::string(s) + "'");
}

constexpr std::string_view to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::kBeta:
      return "beta";
    case SweepAxis::kP:
      return "p";
    case SweepAxis::kNumCells:
      return "n_w";
    case SweepAxis::kGamma:
      return "gamma";
  }
  return "?";
}

/// Attack applied in every trial. The attack seed is filled in per trial;
/// an empty attribute means the watermark attribute.
struct AttackTemplate {
  AttackSpec spec;
  MatchMode match_mode = MatchMode::kByRowIndex;
};

struct TrialOutcome {
  bool decided = false;  // false when detection had no testable cell
  double z = std::numeric_limits<double>::quiet_NaN();
  double mismatch = std::numeric_limits<double>::quiet_NaN();
  bool detected = false;
  std::size_t n_w_effective = 0;
};

struct SweepPoint {
  double value = 0;
  double mean_z = 0;
  double z_std = 0;
  double mismatch = 0;        // mean flipped-green fraction
  double detection_rate = 0;  // undecided trials count as not detected
  std::size_t trials = 0;
  std::size_t undecided = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kBeta;
  std::vector<SweepPoint> points;
  std::size_t trials = 0;
};

struct RunOptions {
  double threshold = kDefaultThreshold;
  std::uint64_t experiment_seed = 0;
  unsigned threads = 0;
};

/// One embed -> attack -> detect round with the given seeds.
inline TrialOutcome run_trial(const TabularData& original, EmbedConfig config, const AttackTemplate& attack,
                              double threshold, std::uint64_t trial_seed) {
  config.master_seed = derive_seed(trial_seed, 0);
  const auto embedded = embed(original, config);
  AttackSpec spec = attack.spec;
  spec.seed = derive_seed(trial_seed, 1);
  if (spec.attribute.empty()) spec.attribute = config.attribute;
  const auto attacked = apply_attack(embedded.watermarked, spec);
  TrialOutcome out;
  try {
    const auto report = detect(original, attacked, embedded.key, {threshold, attack.match_mode});
    out.decided = true;
    out.z = report.z;
    out.mismatch = report.mismatch_fraction();
    out.detected = report.watermark_detected;
    out.n_w_effective = report.n_w_effective;
  } catch (const DetectionError&) {
    out.decided = false;
  }
  return out;
}

inline SweepPoint aggregate(double value, std::span<const TrialOutcome> outcomes) {
  SweepPoint pt;
  pt.value = value;
  pt.trials = outcomes.size();
  std::vector<double> zs, mps;
  std::size_t hits = 0;
  for (const auto& o : outcomes) {
    if (!o.decided) {
      ++pt.undecided;
      continue;
    }
    zs.push_back(o.z);
    mps.push_back(o.mismatch);
    hits += o.detected;
  }
  pt.mean_z = stats::mean(zs);
  pt.z_std = zs.size() >= 2 ? stats::stddev(zs) : (zs.empty() ? std::nan("") : 0.0);
  pt.mismatch = stats::mean(mps);
  pt.detection_rate = pt.trials ? static_cast<double>(hits) / static_cast<double>(pt.trials) : 0.0;
  return pt;
}

/// For each axis value, `trials` rounds with fresh seeds drawn from
/// (experiment_seed, point, trial).
inline SweepResult run_sweep(const DataSource& data, const EmbedConfig& config, const AttackTemplate& attack,
                             SweepAxis axis, std::span<const double> values, std::size_t trials,
                             const RunOptions& options = {}) {
  if (trials == 0) throw ConfigError("sweep: trials must be positive");
  if (values.empty()) throw ConfigError("sweep: no axis values");
  std::vector<EmbedConfig> configs;
  std::vector<AttackTemplate> attacks;
  for (double v : values) {
    EmbedConfig c = config;
    AttackTemplate a = attack;
    switch (axis) {
      case SweepAxis::kBeta:
        if (!(v >= 0 && v <= 1)) throw ConfigError("sweep: beta values must lie in [0, 1]");
        a.spec.beta = v;
        break;
      case SweepAxis::kP:
        c.params.p = v;
        break;
      case SweepAxis::kNumCells:
        if (!(v >= 1) || v != std::floor(v)) throw ConfigError("sweep: n_w values must be positive integers");
        c.n_cells = static_cast<std::size_t>(v);
        break;
      case SweepAxis::kGamma:
        c.params.gamma = v;
        break;
    }
    a.spec.validate();
    configs.push_back(std::move(c));
    attacks.push_back(std::move(a));
  }

  const std::size_t total = values.size() * trials;
  std::vector<TrialOutcome> outcomes(total);
  parallel_for(
      total,
      [&](std::size_t job) {
        const std::size_t point = job / trials, trial = job % trials;
        const std::uint64_t seed = derive_seed(options.experiment_seed, point, trial);
        const TabularData original = data(derive_seed(seed, 2));
        outcomes[job] = run_trial(original, configs[point], attacks[point], options.threshold, seed);
      },
      options.threads);

  SweepResult result;
  result.axis = axis;
  result.trials = trials;
  for (std::size_t i = 0; i < values.size(); ++i)
    result.points.push_back(aggregate(values[i], std::span(outcomes).subspan(i * trials, trials)));
  return result;
}

inline SweepResult run_sweep(const TabularData& base, const EmbedConfig& config, const AttackTemplate& attack,
                             SweepAxis axis, std::span<const double> values, std::size_t trials,
                             const RunOptions& options = {}) {
  return run_sweep(fixed_data(base), config, attack, axis, values, trials, options);
}

// ---------------------------------------------------------------------------
// Unwatermarked populations

/// Builds the suspicious table for a null trial from the unwatermarked one.
using SuspectTransform = std::function<TabularData(const TabularData& original, std::uint64_t seed)>;

inline SuspectTransform identity_suspect() {
  return [](const TabularData& t, std::uint64_t) { return t; };
}

/// z-scores of detect(D, suspect(D), fresh key) over independent trials.
inline std::vector<double> null_z_scores(const DataSource& data, const EmbedConfig& config, std::size_t trials,
                                         const RunOptions& options = {},
                                         const SuspectTransform& suspect = identity_suspect(),
                                         MatchMode mode = MatchMode::kByRowIndex) {
  std::vector<double> zs(trials);
  parallel_for(
      trials,
      [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(options.experiment_seed, 0x6E756C6CULL, t);
        const TabularData original = data(derive_seed(seed, 2));
        EmbedConfig c = config;
        c.master_seed = derive_seed(seed, 0);
        const auto key = select_key_cells(original, c);
        const auto report = detect(original, suspect(original, derive_seed(seed, 1)), key, {options.threshold, mode});
        zs[t] = report.z;
      },
      options.threads);
  return zs;
}

struct FalsePositiveResult {
  double rate = 0;
  std::size_t trials = 0;
  std::size_t false_positives = 0;
  std::vector<double> z_scores;
};

inline FalsePositiveResult estimate_false_positive_rate(const DataSource& data, const EmbedConfig& config,
                                                        std::size_t trials, const RunOptions& options = {},
                                                        const SuspectTransform& suspect = identity_suspect()) {
  if (trials < 100) throw ConfigError("false-positive estimate needs at least 100 trials");
  FalsePositiveResult out;
  out.trials = trials;
  out.z_scores = null_z_scores(data, config, trials, options, suspect);
  for (double z : out.z_scores) out.false_positives += z >= options.threshold;
  out.rate = static_cast<double>(out.false_positives) / static_cast<double>(trials);
  return out;
}

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  double threshold = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1), non-decreasing in fpr
  double auc = 0;
};

/// Threshold swept over every observed score, positive iff z >= threshold.
inline RocCurve roc_from_scores(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) throw ConfigError("roc: both populations must be nonempty");
  std::vector<double> pos(positives.begin(), positives.end()), neg(negatives.begin(), negatives.end());
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  std::vector<double> thresholds(pos);
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve curve;
  curve.points.push_back({0, 0, std::numeric_limits<double>::infinity()});
  std::size_t ip = 0, in = 0;
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  for (double t : thresholds) {
    while (ip < pos.size() && pos[ip] >= t) ++ip;
    while (in < neg.size() && neg[in] >= t) ++in;
    curve.points.push_back({static_cast<double>(in) / nn, static_cast<double>(ip) / np, t});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

struct RocExperiment {
  DataSource data;
  EmbedConfig config;
  std::optional<AttackTemplate> attack;  // applied to the watermarked population
  std::size_t trials = 500;              // per population
};

struct RocResult {
  RocCurve curve;
  std::vector<double> watermarked_z;
  std::vector<double> unwatermarked_z;
};

inline RocResult run_roc(const RocExperiment& exp, const RunOptions& options = {}) {
  if (exp.trials == 0) throw ConfigError("roc: trials must be positive");
  RocResult out;
  out.watermarked_z.resize(exp.trials);
  const AttackTemplate attack = exp.attack.value_or(AttackTemplate{});
  parallel_for(
      exp.trials,
      [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(options.experiment_seed, 0x726F63ULL, t);
        const TabularData original = exp.data(derive_seed(seed, 2));
        const auto o = run_trial(original, exp.config, attack, options.threshold, seed);
        out.watermarked_z[t] = o.decided ? o.z : -std::numeric_limits<double>::infinity();
      },
      options.threads);
  RunOptions null_options = options;
  null_options.experiment_seed = derive_seed(options.experiment_seed, 0x6E6567ULL);
  out.unwatermarked_z = null_z_scores(exp.data, exp.config, exp.trials, null_options);
  out.curve = roc_from_scores(out.watermarked_z, out.unwatermarked_z);
  return out;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json sweep_to_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["axis"] = std::string(to_string(r.axis));
  j["trials"] = r.trials;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : r.points) {
    nlohmann::ordered_json o;
    o["value"] = p.value;
    o["mean_z"] = detail::number_or_null(p.mean_z);
    o["z_std"] = detail::number_or_null(p.z_std);
    o["mismatch"] = detail::number_or_null(p.mismatch);
    o["detection_rate"] = p.detection_rate;
    o["trials"] = p.trials;
    o["undecided"] = p.undecided;
    pts.push_back(std::move(o));
  }
  j["points"] = std::move(pts);
  return j;
}

inline std::string sweep_to_csv(const SweepResult& r) {
  auto cell = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); };
  std::ostringstream out;
  out << to_string(r.axis) << ",mean_z,z_std,mismatch,detection_rate,trials,undecided\n";
  for (const auto& p : r.points)
    out << format_number(p.value) << ',' << cell(p.mean_z) << ',' << cell(p.z_std) << ',' << cell(p.mismatch) << ','
        << format_number(p.detection_rate) << ',' << p.trials << ',' << p.undecided << '\n';
  return out.str();
}

inline nlohmann::ordered_json roc_to_json(const RocCurve& c) {
  nlohmann::ordered_json j;
  j["auc"] = c.auc;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : c.points) {
    nlohmann::ordered_json o;
    o["fpr"] = p.fpr;
    o["tpr"] = p.tpr;
    o["threshold"] = detail::number_or_null(p.threshold);
    pts.push_back(std::move(o));
  }
  j["points"] = std::move(pts);
  return j;
}

inline std::string roc_to_csv(const RocCurve& c) {
  std::ostringstream out;
  out << "fpr,tpr,threshold\n";
  for (const auto& p : c.points)
    out << format_number(p.fpr) << ',' << format_number(p.tpr) << ','
        << (std::isfinite(p.threshold) ? format_number(p.threshold) : std::string()) << '\n';
  return out.str();
}

}  // namespace tabmark::eval
