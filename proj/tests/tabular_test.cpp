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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tabmark/rng.hpp"
#include "tabmark/synth.hpp"
#include "tabmark/tabular.hpp"

namespace {

using namespace tabmark;
using testing_support::TempDir;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Tabular, InfersKinds) {
  const auto t = parse_csv("a,b\n1,x\n2,y");
  ASSERT_EQ(t.column_count(), 2u);
  EXPECT_EQ(t.row_count(), 2u);
  EXPECT_EQ(t.column("a").kind(), ColumnKind::kNumeric);
  EXPECT_EQ(t.column("b").kind(), ColumnKind::kCategorical);
  EXPECT_EQ(t.column("a").number(1), 2.0);
  EXPECT_EQ(t.column("b").token(0), "x");
}

TEST(Tabular, OverrideForcesNumericAndReportsCell) {
  try {
    parse_csv("a,b\n1,2\n3,abc\n", {{"b", ColumnKind::kNumeric}}, "t.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("t.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
  }
}

TEST(Tabular, OverrideForcesCategorical) {
  const auto t = parse_csv("a\n1\n2\n1\n", {{"a", ColumnKind::kCategorical}});
  EXPECT_EQ(t.column("a").kind(), ColumnKind::kCategorical);
  EXPECT_EQ(t.column("a").categories(), (std::vector<std::string>{"1", "2"}));
}

TEST(Tabular, RaggedRowsRejected) {
  EXPECT_THROW(parse_csv("a,b\n1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ParseError);
}

TEST(Tabular, UnknownOverrideRejected) { EXPECT_THROW(parse_csv("a\n1\n", {{"z", ColumnKind::kNumeric}}), ParseError); }

TEST(Tabular, QuotingCrlfAndBom) {
  const auto t = parse_csv("\xEF\xBB\xBFname,v\r\n\"x, \"\"y\"\"\",1\r\n\"multi\nline\",2\r\n");
  EXPECT_EQ(t.column("name").token(0), "x, \"y\"");
  EXPECT_EQ(t.column("name").token(1), "multi\nline");
  EXPECT_EQ(t.column("v").number(1), 2.0);
  EXPECT_EQ(parse_csv(to_csv(t), schema_of(t)), t);
}

TEST(Tabular, MissingCellsNumericAndCategorical) {
  const auto t = parse_csv("a,b\n1,x\n,\n3,z\n");
  EXPECT_EQ(t.column("a").kind(), ColumnKind::kNumeric);
  EXPECT_TRUE(t.column("a").is_missing(1));
  EXPECT_TRUE(t.column("b").is_missing(1));
  EXPECT_EQ(t.column("b").categories(), (std::vector<std::string>{"x", "z"}));
  EXPECT_EQ(to_csv(t), "a,b\n1,x\n,\n3,z\n");
}

TEST(Tabular, RejectsNonFiniteNumbers) {
  double v = 0;
  EXPECT_FALSE(parse_number("inf", v));
  EXPECT_FALSE(parse_number("nan", v));
  EXPECT_FALSE(parse_number("1.5x", v));
  EXPECT_TRUE(parse_number("-1e-3", v));
  EXPECT_EQ(v, -1e-3);
  EXPECT_EQ(parse_csv("a\ninf\n").column("a").kind(), ColumnKind::kCategorical);
}

TEST(Tabular, PointOneRoundTrips) {
  TempDir dir;
  TabularData t;
  t.add_column(Column("v", std::vector<double>{0.1, 1.0 / 3.0, -2.5e-300}));
  save_csv(t, dir / "t.csv");
  const auto back = load_csv(dir / "t.csv");
  EXPECT_EQ(back.column("v").number(0), 0.1);
  EXPECT_EQ(back, t);
}

TEST(Tabular, HeaderOnlyTable) {
  TempDir dir;
  TabularData t;
  t.add_column(Column("a", std::vector<double>{}));
  t.add_column(Column("b", std::vector<std::string>{}));
  save_csv(t, dir / "e.csv");
  EXPECT_EQ(read_file(dir / "e.csv"), "a,b\n");
  const auto back = load_csv(dir / "e.csv");
  EXPECT_EQ(back.row_count(), 0u);
  EXPECT_EQ(back.column_count(), 2u);
}

TEST(Tabular, SyntheticSaveLoadSaveByteIdentical) {
  TempDir dir;
  SynthConfig sc;
  sc.seed = 3;
  const auto t = generate(sc).table;
  save_csv(t, dir / "a.csv");
  const auto back = load_csv(dir / "a.csv");
  EXPECT_EQ(back, t);
  save_csv(back, dir / "b.csv");
  EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "b.csv"));
}

// Property: load(save(T)) == T over random tables mixing numbers, tokens
// needing quotes, and missing cells.
TEST(Tabular, RandomTablesRoundTrip) {
  TempDir dir;
  const std::vector<std::string> alphabet{"a", "b,c", "q\"q", "line\nbreak", " sp ", "7", "x"};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed, Stream::kExperiment);
    const std::size_t rows = rng.below(30);
    const std::size_t cols = 1 + rng.below(5);
    TabularData t;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string name = "c" + std::to_string(c);
      if (rng.below(2) == 0) {
        std::vector<double> v(rows);
        for (auto& x : v) {
          const auto pick = rng.below(10);
          x = pick == 0 ? kMissing : std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
        }
        t.add_column(Column(name, std::move(v)));
      } else {
        std::vector<std::string> v(rows);
        for (auto& x : v) x = rng.below(8) == 0 ? std::string() : alphabet[rng.below(alphabet.size())];
        t.add_column(Column(name, std::move(v)));
      }
    }
    const auto path = dir / ("r" + std::to_string(seed) + ".csv");
    save_csv(t, path);
    const auto back = load_csv(path, schema_of(t));
    ASSERT_EQ(back, t) << "seed " << seed;
  }
}

TEST(Tabular, CategoriesStableUnderPermutation) {
  Column c("x", std::vector<std::string>{"b", "a", "c", "a"});
  std::vector<std::size_t> perm{3, 1, 0, 2};
  EXPECT_EQ(c.categories(), c.select(perm).categories());
}

TEST(Tabular, SchemaInvariants) {
  TabularData t;
  t.add_column(Column("a", std::vector<double>{1, 2}));
  EXPECT_THROW(t.add_column(Column("a", std::vector<double>{1, 2})), ConfigError);
  EXPECT_THROW(t.add_column(Column("b", std::vector<double>{1})), ConfigError);
  EXPECT_THROW(static_cast<void>(t.column("missing")), ConfigError);
}

TEST(Tabular, IoErrorsNamePath) {
  try {
    load_csv("/nonexistent/dir/x.csv");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.csv"), std::string::npos);
  }
  TabularData t;
  EXPECT_THROW(save_csv(t, "/nonexistent/dir/y.csv"), IoError);
}

}  // namespace
