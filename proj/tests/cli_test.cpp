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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "support.hpp"

namespace {

using testing_support::TempDir;
using Json = nlohmann::json;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tabmark");
  std::ostringstream out, err;
  const int code = tabmark::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  TempDir dir;
  std::string path(const std::string& name) const { return (dir / name).string(); }

  void synth_and_embed() {
    ASSERT_EQ(run({"--seed", "3", "synth", "--rows", "2000", "--mu", "0", "--sigma", "20", "--output", path("d.csv")}).code, 0);
    const auto r = run({"--seed", "5", "--quiet", "embed", "--input", path("d.csv"), "--attribute", "dim0", "--n-cells",
                        "300", "--p", "40", "--match-attrs", "dim1,target", "--key", path("k.json"), "--output",
                        path("w.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

TEST_F(Cli, PipelineDetectsExactly) {
  synth_and_embed();
  const auto r = run({"--json", "detect", "--original", path("d.csv"), "--suspect", path("w.csv"), "--key",
                      path("k.json"), "--report", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["n_g"], 300);
  EXPECT_NEAR(j["z"].get<double>(), std::sqrt(300.0), 1e-9);
  EXPECT_EQ(j["detected"], true);
  const auto report = Json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(report["cells"].size(), 300u);
  EXPECT_TRUE(Json::parse(slurp(dir / "k.json")).contains("created"));
}

TEST_F(Cli, UnwatermarkedDataExitsOne) {
  synth_and_embed();
  const auto r = run({"detect", "--original", path("d.csv"), "--suspect", path("d.csv"), "--key", path("k.json")});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("not detected"), std::string::npos);
}

TEST_F(Cli, DeterministicGivenSeed) {
  synth_and_embed();
  const auto first = slurp(dir / "w.csv");
  ASSERT_EQ(run({"--seed", "5", "--quiet", "embed", "--input", path("d.csv"), "--attribute", "dim0", "--n-cells", "300",
                 "--p", "40", "--match-attrs", "dim1,target", "--key", path("k2.json"), "--output", path("w2.csv"),
                 "--no-timestamp"})
                .code,
            0);
  EXPECT_EQ(first, slurp(dir / "w2.csv"));
  EXPECT_FALSE(Json::parse(slurp(dir / "k2.json")).contains("created"));
}

TEST_F(Cli, SeedFromEnvironment) {
  ::setenv("TABULARMARK_SEED", "77", 1);
  ASSERT_EQ(run({"synth", "--rows", "50", "--output", path("a.csv")}).code, 0);
  ::unsetenv("TABULARMARK_SEED");
  ASSERT_EQ(run({"--seed", "77", "synth", "--rows", "50", "--output", path("b.csv")}).code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(Json::parse(slurp(dir / "a.csv.json"))["seed"], "77");
}

TEST_F(Cli, AttackThenMsbDetection) {
  synth_and_embed();
  auto r = run({"--seed", "9", "attack", "--input", path("w.csv"), "--type", "shuffle", "--output", path("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"--json", "detect", "--original", path("d.csv"), "--suspect", path("s.csv"), "--key", path("k.json"),
           "--match", "by-msb"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = run({"--seed", "9", "attack", "--input", path("w.csv"), "--type", "alteration", "--attribute", "dim0", "--beta",
           "1", "--noise", "uniform", "--scale", "40", "--output", path("a.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"detect", "--original", path("d.csv"), "--suspect", path("a.csv"), "--key", path("k.json")});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, AnalyzePropositionExample) {
  const auto r = run({"analyze", "--n", "10000", "--n-cells", "400", "--alpha", "5.0", "--p", "40", "--k", "500",
                      "--sigma", "40", "--noise", "uniform", "--confidence"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j["n_alpha"].get<double>(), 250.0, 1e-12);
  EXPECT_GT(j["expected_n_h"].get<double>(), 7500);
  EXPECT_TRUE(j["confidence_bound_n_h"].is_number());
}

TEST_F(Cli, SweepAndRocWriteFiles) {
  auto r = run({"--seed", "1", "--quiet", "sweep", "--trials", "3", "--values", "0,0.5", "--rows", "500", "--n-cells",
                "50", "--output", path("s.json"), "--csv", path("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(slurp(dir / "s.json"))["points"].size(), 2u);
  EXPECT_EQ(slurp(dir / "s.csv").substr(0, 5), "beta,");
  r = run({"--seed", "1", "--json", "roc", "--trials", "20", "--rows", "500", "--n-cells", "50", "--output",
           path("roc.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(Json::parse(r.out)["auc"].get<double>(), 0.9);
}

TEST_F(Cli, ErrorsExitTwo) {
  EXPECT_EQ(run({"embed", "--bogus"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  auto r = run({"detect", "--original", path("nope.csv"), "--suspect", path("nope.csv"), "--key", path("nope.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("does not exist"), std::string::npos);
  r = run({"embed", "--input", path("nope.csv"), "--attribute", "a", "--n-cells", "3", "--match-attrs", "b",
           "--key", path("k.json"), "--output", path("o.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("match attributes"), std::string::npos) << r.err;
  EXPECT_EQ(run({"analyze", "--n", "100", "--n-cells", "10", "--p", "40", "--sigma", "0.01"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, AttackRequiresScaleForNumericAlteration) {
  ASSERT_EQ(run({"synth", "--rows", "20", "--output", path("d.csv")}).code, 0);
  const auto r = run({"attack", "--input", path("d.csv"), "--type", "alteration", "--attribute", "dim0", "--beta", "0.5",
                      "--output", path("o.csv")});
  EXPECT_EQ(r.code, 2);
}

}  // namespace
