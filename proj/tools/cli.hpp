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

// `tabmark` command line. Exit codes: 0 success / watermark detected,
// 1 watermark not detected, 2 any error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabmark/tabmark.hpp"

namespace tabmark::cli {

inline constexpr int kExitDetected = 0;
inline constexpr int kExitNotDetected = 1;
inline constexpr int kExitError = 2;

namespace detail {

using Json = nlohmann::ordered_json;

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    double v = 0;
    if (!parse_number(item, v)) throw ConfigError(flag + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline void require_file(const std::string& path, const std::string& flag) {
  if (!std::filesystem::exists(path)) throw IoError(flag + ": file '" + path + "' does not exist");
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Globals {
  std::uint64_t seed = 0;
  bool quiet = false;
  bool json = false;
};

// Flags shared by `sweep` and `roc`.
struct ExperimentFlags {
  std::string input;
  std::size_t rows = 2000;
  double mu = 0;
  double sigma = 20;
  std::string attribute;
  std::size_t n_cells = 300;
  std::optional<double> p;
  int k = 500;
  double gamma = 0.5;
  std::string noise = "uniform";
  double sigma_t = 0;
  std::string match_attrs;
  std::string attack = "alteration";
  std::string attack_noise = "uniform";
  std::optional<double> scale;
  double beta = 0;
  std::string match = "by-row";
  double threshold = kDefaultThreshold;
  unsigned threads = 0;
  std::string output;
  std::string csv;
};

inline void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--input", f.input, "Base CSV (default: synthetic data per trial)");
  cmd->add_option("--rows", f.rows, "Synthetic rows")->check(CLI::PositiveNumber);
  cmd->add_option("--mu", f.mu, "Synthetic mean");
  cmd->add_option("--sigma", f.sigma, "Synthetic standard deviation")->check(CLI::PositiveNumber);
  cmd->add_option("--attribute", f.attribute, "Watermark attribute (default dim0 on synthetic data)");
  cmd->add_option("--n-cells", f.n_cells, "Key cells")->check(CLI::PositiveNumber);
  cmd->add_option("--p", f.p, "Perturbation half-width (default 2 sigma)");
  cmd->add_option("--k", f.k, "Unit domains")->check(CLI::Range(2, 1 << 24));
  cmd->add_option("--gamma", f.gamma, "Green fraction")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--noise", f.noise, "Embedding noise")->check(CLI::IsMember({"uniform", "truncnormal"}));
  cmd->add_option("--sigma-t", f.sigma_t, "Truncated-normal sigma");
  cmd->add_option("--match-attrs", f.match_attrs, "Comma-separated match attributes");
  cmd->add_option("--attack", f.attack, "Attack type")
      ->check(CLI::IsMember({"alteration", "insertion", "deletion", "shuffle"}));
  cmd->add_option("--attack-noise", f.attack_noise, "Alteration noise")
      ->check(CLI::IsMember({"uniform", "gaussian", "laplace", "category"}));
  cmd->add_option("--scale", f.scale, "Alteration noise scale (default 2 sigma)");
  cmd->add_option("--beta", f.beta, "Attack proportion")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--match", f.match, "Row matching at detection")->check(CLI::IsMember({"by-row", "by-msb"}));
  cmd->add_option("--threshold", f.threshold, "z-score threshold");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--output", f.output, "Result JSON path");
  cmd->add_option("--csv", f.csv, "Result CSV path");
}

struct Experiment {
  eval::DataSource data;
  EmbedConfig config;
  eval::AttackTemplate attack;
};

inline Experiment build_experiment(const ExperimentFlags& f) {
  Experiment e;
  if (f.noise == "truncnormal" && !(f.sigma_t > 0)) throw ConfigError("--noise truncnormal requires --sigma-t > 0");
  e.config.n_cells = f.n_cells;
  e.config.params.k = f.k;
  e.config.params.gamma = f.gamma;
  e.config.noise = f.noise == "uniform" ? NoiseModel::uniform() : NoiseModel::truncated_normal(f.sigma_t);
  double scale_default = 2.0 * f.sigma;
  if (!f.input.empty()) {
    require_file(f.input, "--input");
    if (f.attribute.empty()) throw ConfigError("--attribute is required with --input");
    if (f.match_attrs.empty()) throw ConfigError("--match-attrs is required with --input");
    auto table = load_csv(f.input);
    e.config.attribute = f.attribute;
    const Column& col = table.column(f.attribute);
    if (col.is_numeric()) {
      const double suggested = suggest_p(col);
      e.config.params.p = f.p.value_or(suggested);
      scale_default = suggested;
    }
    e.config.match_attributes = split_list(f.match_attrs);
    e.data = eval::fixed_data(std::move(table));
  } else {
    SynthConfig sc;
    sc.rows = f.rows;
    sc.mu = f.mu;
    sc.sigma = f.sigma;
    sc.validate();
    e.config.attribute = f.attribute.empty() ? "dim0" : f.attribute;
    e.config.params.p = f.p.value_or(2.0 * f.sigma);
    e.config.match_attributes = f.match_attrs.empty() ? std::vector<std::string>{"dim1", "target"}
                                                      : split_list(f.match_attrs);
    e.data = eval::synthetic_data(sc);
  }
  e.attack.spec.kind = parse_attack_kind(f.attack);
  e.attack.spec.noise = parse_attack_noise(f.attack_noise);
  e.attack.spec.scale = f.scale.value_or(scale_default);
  e.attack.spec.beta = f.beta;
  e.attack.spec.attribute = e.config.attribute;
  e.attack.match_mode = f.match == "by-msb" ? MatchMode::kByMsbKey : MatchMode::kByRowIndex;
  if (e.attack.spec.kind != AttackKind::kAlteration && e.attack.match_mode == MatchMode::kByRowIndex &&
      e.attack.spec.kind != AttackKind::kShuffle && f.beta > 0)
    throw ConfigError("--attack " + f.attack + " changes the row count; use --match by-msb");
  return e;
}

}  // namespace detail

/// Runs the CLI on `args` (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::Json;
  CLI::App app{"Statistical watermarking for tabular datasets", "tabmark"};
  app.require_subcommand(1);
  app.fallthrough();
  detail::Globals g;
  app.add_option("--seed", g.seed, "Seed for every random decision")->envname("TABULARMARK_SEED");
  app.add_flag("--quiet", g.quiet, "Suppress human-readable output");
  app.add_flag("--json", g.json, "Print machine-readable JSON to stdout");

  // embed
  struct {
    std::string input, attribute, match_attrs, key, output, noise = "uniform", kind;
    std::size_t n_cells = 0;
    std::optional<double> p;
    int k = 500;
    double gamma = 0.5;
    double sigma_t = 0;
    bool stamp = true;
  } em;
  auto* embed_cmd = app.add_subcommand("embed", "Embed a watermark and write the secret key");
  embed_cmd->add_option("--input", em.input, "Original CSV")->required();
  embed_cmd->add_option("--attribute", em.attribute, "Column to watermark")->required();
  embed_cmd->add_option("--n-cells", em.n_cells, "Number of key cells")->required()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--p", em.p, "Perturbation half-width (default 2 x column std)");
  embed_cmd->add_option("--k", em.k, "Unit domains")->check(CLI::Range(2, 1 << 24));
  embed_cmd->add_option("--gamma", em.gamma, "Green fraction")->check(CLI::Range(0.0, 1.0));
  embed_cmd->add_option("--noise", em.noise, "Noise model")->check(CLI::IsMember({"uniform", "truncnormal"}));
  embed_cmd->add_option("--sigma-t", em.sigma_t, "Truncated-normal sigma");
  embed_cmd->add_option("--match-attrs", em.match_attrs, "2 or 3 comma-separated match attributes")->required();
  embed_cmd->add_option("--kind", em.kind, "Force the attribute kind")->check(CLI::IsMember({"numeric", "categorical"}));
  embed_cmd->add_option("--key", em.key, "Key file to write")->required();
  embed_cmd->add_option("--output", em.output, "Watermarked CSV to write")->required();
  embed_cmd->add_flag("!--no-timestamp", em.stamp, "Omit the creation timestamp from the key");

  // detect
  struct {
    std::string original, suspect, key, match = "by-row", report;
    double threshold = kDefaultThreshold;
  } de;
  auto* detect_cmd = app.add_subcommand("detect", "Test a suspicious table for the watermark");
  detect_cmd->add_option("--original", de.original, "Original CSV")->required();
  detect_cmd->add_option("--suspect", de.suspect, "Suspicious CSV")->required();
  detect_cmd->add_option("--key", de.key, "Key file")->required();
  detect_cmd->add_option("--threshold", de.threshold, "z-score threshold");
  detect_cmd->add_option("--match", de.match, "Row matching")->check(CLI::IsMember({"by-row", "by-msb"}));
  detect_cmd->add_option("--report", de.report, "Report JSON to write");

  // attack
  struct {
    std::string input, type, attribute, noise = "uniform", output;
    double beta = 0;
    std::optional<double> scale;
  } at;
  auto* attack_cmd = app.add_subcommand("attack", "Simulate an attack on a table");
  attack_cmd->add_option("--input", at.input, "Input CSV")->required();
  attack_cmd->add_option("--type", at.type, "Attack type")
      ->required()
      ->check(CLI::IsMember({"alteration", "insertion", "deletion", "shuffle"}));
  attack_cmd->add_option("--attribute", at.attribute, "Attribute to alter");
  attack_cmd->add_option("--beta", at.beta, "Affected proportion")->check(CLI::Range(0.0, 1.0));
  attack_cmd->add_option("--noise", at.noise, "Alteration noise")
      ->check(CLI::IsMember({"uniform", "gaussian", "laplace", "category"}));
  attack_cmd->add_option("--scale", at.scale, "Noise half-width / sigma / Laplace scale");
  attack_cmd->add_option("--output", at.output, "Output CSV")->required();

  // synth
  SynthConfig sy;
  std::string synth_output, synth_weights;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic classification table");
  synth_cmd->add_option("--rows", sy.rows, "Rows")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--mu", sy.mu, "Feature mean");
  synth_cmd->add_option("--sigma", sy.sigma, "Feature standard deviation")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--weights", synth_weights, "w0,w1 in [-1,1] (default random)");
  synth_cmd->add_option("--extra-features", sy.extra_features, "Additional independent features");
  synth_cmd->add_option("--output", synth_output, "Output CSV")->required();

  // analyze
  analysis::CostInputs an;
  std::string an_noise = "uniform";
  bool an_bound = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Attacker cost of removing a watermark");
  analyze_cmd->add_option("--n", an.n, "Cells in the watermarked attribute")->required();
  analyze_cmd->add_option("--n-cells", an.n_w, "Key cells")->required()->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--alpha", an.alpha, "Detection threshold");
  analyze_cmd->add_option("--p", an.p, "Perturbation half-width")->required();
  analyze_cmd->add_option("--k", an.k, "Unit domains");
  analyze_cmd->add_option("--sigma", an.sigma, "Attacker noise standard deviation")->required();
  analyze_cmd->add_option("--noise", an_noise, "Attacker noise")->check(CLI::IsMember({"uniform", "gaussian", "laplace"}));
  analyze_cmd->add_flag("--confidence", an_bound, "Also compute the confidence lower bound on n_h");
  analyze_cmd->add_option("--confidence-level", an.confidence, "Confidence level")->check(CLI::Range(0.0, 1.0));

  // sweep / roc
  detail::ExperimentFlags sw;
  std::string sweep_axis = "beta", sweep_values = "0.2,0.4,0.6,0.8,1.0";
  std::size_t sweep_trials = eval::kDefaultTrials;
  auto* sweep_cmd = app.add_subcommand("sweep", "z-score sweep over an attack or parameter axis");
  detail::add_experiment_flags(sweep_cmd, sw);
  sweep_cmd->add_option("--axis", sweep_axis, "beta | p | n_w | gamma")->check(CLI::IsMember({"beta", "p", "n_w", "gamma"}));
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated axis values");
  sweep_cmd->add_option("--trials", sweep_trials, "Trials per point")->check(CLI::PositiveNumber);

  detail::ExperimentFlags ro;
  std::size_t roc_trials = 500;
  auto* roc_cmd = app.add_subcommand("roc", "ROC curve of watermarked vs unwatermarked populations");
  detail::add_experiment_flags(roc_cmd, ro);
  roc_cmd->add_option("--trials", roc_trials, "Trials per population")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  auto say = [&](const std::string& line) {
    if (!g.quiet && !g.json) out << line << '\n';
  };

  try {
    if (*embed_cmd) {
      if (em.noise == "truncnormal" && !(em.sigma_t > 0)) throw ConfigError("--noise truncnormal requires --sigma-t > 0");
      auto match = detail::split_list(em.match_attrs);
      if (match.size() < 2 || match.size() > 3)
        throw ConfigError("--match-attrs: expected 2 or 3 match attributes, got " + std::to_string(match.size()));
      detail::require_file(em.input, "--input");
      SchemaOverrides overrides;
      if (!em.kind.empty()) overrides.emplace(em.attribute, parse_column_kind(em.kind));
      const auto data = load_csv(em.input, overrides);
      EmbedConfig config;
      config.attribute = em.attribute;
      config.n_cells = em.n_cells;
      config.params.k = em.k;
      config.params.gamma = em.gamma;
      config.noise = em.noise == "uniform" ? NoiseModel::uniform() : NoiseModel::truncated_normal(em.sigma_t);
      config.master_seed = g.seed;
      config.match_attributes = match;
      const Column& col = data.column(em.attribute);
      if (col.is_numeric()) config.params.p = em.p ? *em.p : suggest_p(col);
      auto result = embed(data, config);
      if (em.stamp) result.key.created = detail::utc_timestamp();
      save_csv(result.watermarked, em.output);
      save_key(result.key, em.key);
      if (!result.outside_range_rows.empty() && !g.quiet) {
        err << "warning: " << result.outside_range_rows.size()
            << " perturbed key cells fall outside the original column range (rows:";
        for (std::size_t i = 0; i < result.outside_range_rows.size() && i < 20; ++i)
          err << ' ' << result.outside_range_rows[i];
        err << (result.outside_range_rows.size() > 20 ? " ...)\n" : ")\n");
      }
      if (g.json) {
        Json j;
        j["attribute"] = config.attribute;
        j["kind"] = std::string(to_string(result.key.kind));
        j["n_w"] = result.key.n_cells();
        if (col.is_numeric()) {
          j["p"] = config.params.p;
          j["k"] = config.params.k;
        }
        j["gamma"] = config.params.gamma;
        j["output"] = em.output;
        j["key"] = em.key;
        j["outside_range_rows"] = result.outside_range_rows;
        out << j.dump(2) << '\n';
      }
      say("embedded " + std::to_string(result.key.n_cells()) + " key cells into '" + config.attribute + "' -> " +
          em.output + " (key: " + em.key + ")");
      return 0;
    }

    if (*detect_cmd) {
      detail::require_file(de.key, "--key");
      detail::require_file(de.original, "--original");
      detail::require_file(de.suspect, "--suspect");
      const auto key = load_key(de.key);
      SchemaOverrides overrides{{key.attribute, key.kind}};
      const auto original = load_csv(de.original, overrides);
      for (const auto& m : key.match_attributes)
        if (const auto* c = original.find(m)) overrides.emplace(m, c->kind());
      const auto suspect = load_csv(de.suspect, overrides);
      DetectOptions opts;
      opts.threshold = de.threshold;
      opts.match_mode = de.match == "by-msb" ? MatchMode::kByMsbKey : MatchMode::kByRowIndex;
      const auto report = detect(original, suspect, key, opts);
      if (!de.report.empty()) detail::write_text(de.report, report_to_json(report).dump(2) + "\n");
      if (g.json) {
        auto j = report_to_json(report);
        j.erase("cells");
        out << j.dump(2) << '\n';
      }
      std::ostringstream line;
      line << "z = " << report.z << "  n_g = " << report.n_g << " / " << report.n_w_effective
           << "  threshold = " << report.threshold << "  -> "
           << (report.watermark_detected ? "watermark detected" : "watermark not detected");
      say(line.str());
      return report.watermark_detected ? kExitDetected : kExitNotDetected;
    }

    if (*attack_cmd) {
      AttackSpec spec;
      spec.kind = parse_attack_kind(at.type);
      spec.beta = at.beta;
      spec.noise = parse_attack_noise(at.noise);
      spec.seed = g.seed;
      spec.attribute = at.attribute;
      if (spec.kind == AttackKind::kAlteration && at.attribute.empty())
        throw ConfigError("--type alteration requires --attribute");
      detail::require_file(at.input, "--input");
      const auto data = load_csv(at.input);
      if (spec.kind == AttackKind::kAlteration) {
        const Column& col = data.column(at.attribute);
        if (col.is_numeric() && spec.noise == AttackNoise::kCategoryReplace)
          throw ConfigError("--noise category needs a categorical attribute");
        if (!col.is_numeric()) spec.noise = AttackNoise::kCategoryReplace;
        if (col.is_numeric()) {
          if (!at.scale) throw ConfigError("--type alteration on a numeric attribute requires --scale");
          spec.scale = *at.scale;
        }
      }
      const auto attacked = apply_attack(data, spec);
      save_csv(attacked, at.output);
      if (g.json) {
        Json j;
        j["type"] = at.type;
        j["beta"] = at.beta;
        j["rows_in"] = data.row_count();
        j["rows_out"] = attacked.row_count();
        j["output"] = at.output;
        out << j.dump(2) << '\n';
      }
      say(at.type + " attack: " + std::to_string(data.row_count()) + " -> " + std::to_string(attacked.row_count()) +
          " rows -> " + at.output);
      return 0;
    }

    if (*synth_cmd) {
      sy.seed = g.seed;
      if (!synth_weights.empty()) {
        const auto w = detail::parse_doubles(synth_weights, "--weights");
        if (w.size() != 2) throw ConfigError("--weights expects exactly two values");
        sy.weights = std::array<double, 2>{w[0], w[1]};
      }
      const auto ds = generate(sy);
      save_csv(ds.table, synth_output);
      const auto meta = synth_metadata(ds);
      detail::write_text(synth_output + ".json", meta.dump(2) + "\n");
      if (g.json) out << meta.dump(2) << '\n';
      say("wrote " + std::to_string(sy.rows) + " rows -> " + synth_output);
      return 0;
    }

    if (*analyze_cmd) {
      an.noise = analysis::parse_attacker_noise(an_noise);
      const auto est = analysis::estimate_removal_cost(an, an_bound);
      if (!g.quiet) out << analysis::estimate_to_json(est).dump(2) << '\n';
      return 0;
    }

    if (*sweep_cmd) {
      const auto axis = eval::parse_axis(sweep_axis);
      const auto values = detail::parse_doubles(sweep_values, "--values");
      const auto e = detail::build_experiment(sw);
      eval::RunOptions opts{sw.threshold, g.seed, sw.threads};
      const auto result = eval::run_sweep(e.data, e.config, e.attack, axis, values, sweep_trials, opts);
      const auto j = eval::sweep_to_json(result);
      if (!sw.output.empty()) detail::write_text(sw.output, j.dump(2) + "\n");
      if (!sw.csv.empty()) detail::write_text(sw.csv, eval::sweep_to_csv(result));
      if (g.json) {
        out << j.dump(2) << '\n';
      } else if (!g.quiet) {
        out << eval::sweep_to_csv(result);
      }
      return 0;
    }

    if (*roc_cmd) {
      const auto e = detail::build_experiment(ro);
      eval::RocExperiment exp{e.data, e.config, e.attack, roc_trials};
      eval::RunOptions opts{ro.threshold, g.seed, ro.threads};
      const auto result = eval::run_roc(exp, opts);
      const auto j = eval::roc_to_json(result.curve);
      if (!ro.output.empty()) detail::write_text(ro.output, j.dump(2) + "\n");
      if (!ro.csv.empty()) detail::write_text(ro.csv, eval::roc_to_csv(result.curve));
      if (g.json) {
        Json s;
        s["auc"] = result.curve.auc;
        s["trials"] = roc_trials;
        out << s.dump(2) << '\n';
      }
      say("AUC = " + format_number(result.curve.auc) + " over " + std::to_string(roc_trials) + " + " +
          std::to_string(roc_trials) + " trials");
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace tabmark::cli
