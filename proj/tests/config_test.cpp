// Copyright 2026 The csi4cast-workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <set>

#include "csi4cast/config.hpp"
#include "test_util.hpp"

using namespace csi4cast;
using testing_util::TempDir;

TEST(RunConfig, TextRoundTrip) {
  RunConfig a;
  a.seed = 77;
  a.apply("model.kind", "rnn");
  a.apply("system.n_sc", "8");
  a.apply("system.duplex", "FDD");
  a.apply("rnn.hidden", "12");
  a.apply("train.lr", "0.0025");
  a.apply("grid.velocities", "1,2.5,40");
  a.apply("grid.noise_types", "PHASE,PACKET_DROP");
  a.apply("model.input_scaling", "false");
  const RunConfig b = RunConfig::parse(a.to_text());
  EXPECT_EQ(b.to_text(), a.to_text());
  EXPECT_EQ(b.seed, 77u);
  EXPECT_EQ(b.model.kind, ModelKind::kRnn);
  EXPECT_EQ(b.model.system.duplex, Duplex::kFdd);
  EXPECT_EQ(b.model.rnn.hidden, 12u);
  EXPECT_FALSE(b.model.csi4cast.input_scaling);
  EXPECT_EQ(b.grid.velocities, (std::vector<double>{1.0, 2.5, 40.0}));
}

TEST(RunConfig, EntriesHaveUniqueKeysThatParseBack) {
  const RunConfig a;
  std::set<std::string> keys;
  for (const auto& [k, v] : a.entries()) {
    EXPECT_TRUE(keys.insert(k).second) << k;
    RunConfig b;
    EXPECT_NO_THROW(b.apply(k, v)) << k;
  }
}

TEST(RunConfig, CommentsAndBlankLines) {
  const RunConfig c = RunConfig::parse("# header\n\n  run.seed = 5   # trailing\ngrid.samples=3\n");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.grid.samples, 3u);
}

TEST(RunConfig, RejectsUnknownAndMalformed) {
  EXPECT_ERROR_CODE(RunConfig::parse("no.such.key = 1\n"), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE(RunConfig::parse("run.seed\n"), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE(RunConfig::parse("grid.samples = many\n"), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE(RunConfig::parse("model.kind = transformer\n"), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE(RunConfig::parse("grid.preset = huge\n"), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE(RunConfig::load("/nonexistent/run.cfg"), ErrorCode::kIoError);
}

TEST(RunConfig, PresetThenOverride) {
  const RunConfig c = RunConfig::parse("grid.preset = robustness\ngrid.samples = 7\n");
  EXPECT_EQ(c.grid.track, "robustness");
  EXPECT_EQ(c.grid.samples, 7u);
}

TEST(RunConfig, LoadFromFile) {
  TempDir dir("cfg");
  std::ofstream(dir / "run.cfg") << "run.seed = 9\nsystem.n_tx = 2\n";
  const RunConfig c = RunConfig::load(dir / "run.cfg");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.model.system.n_tx, 2u);
}

TEST(GridPreset, ScenarioCounts) {
  EXPECT_EQ(grid_preset("regular").scenarios(Duplex::kTdd).size(), 162u);
  EXPECT_EQ(grid_preset("robustness").scenarios(Duplex::kTdd).size(), 486u);
  EXPECT_EQ(grid_preset("generalization").scenarios(Duplex::kFdd).size(), 3060u);
  EXPECT_EQ(grid_preset("train").scenarios(Duplex::kTdd).size(), 27u);
  EXPECT_ERROR_CODE(grid_preset("other"), ErrorCode::kInvalidConfig);
}

TEST(GridPreset, TrainingGridIsAwgnWithOpenDegree) {
  for (const auto& s : grid_preset("train").scenarios(Duplex::kFdd)) {
    EXPECT_EQ(s.noise_type, NoiseType::kAwgn);
    EXPECT_TRUE(std::isnan(s.noise_degree));
    EXPECT_EQ(s.duplex, Duplex::kFdd);
  }
}

TEST(GridConfig, NoiseDegreeLists) {
  GridConfig g;
  g.velocities = {1.0};
  g.delay_spreads_ns = {30.0};
  g.profiles = {"NLOS-A"};
  g.noise_types = {"NONE", "PACKET_DROP", "BURST"};
  g.snr_db = {10.0, 20.0};
  g.drop_probs = {0.05};
  const auto s = g.scenarios(Duplex::kTdd);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].noise_type, NoiseType::kNone);
  EXPECT_EQ(s[1].noise_degree, 0.05);
  EXPECT_EQ(s[3].noise_degree, 20.0);
  std::set<std::string> ids;
  for (const auto& x : s) ids.insert(x.id());
  EXPECT_EQ(ids.size(), s.size());
}

TEST(Fnv1a, KnownDigests) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}
