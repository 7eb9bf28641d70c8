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

#include <fstream>
#include <sstream>

#include "csi4cast/commands.hpp"
#include "csi4cast/dataset_io.hpp"
#include "test_util.hpp"

using namespace csi4cast;
using testing_util::TempDir;

namespace {

RunConfig small_run() {
  RunConfig c = RunConfig::parse(
      "run.seed = 3\n"
      "system.n_tx = 2\nsystem.n_sc = 8\nsystem.n_guard = 2\n"
      "system.hist_len = 6\nsystem.pred_len = 2\n"
      "grid.velocities = 1,30\ngrid.delay_spreads_ns = 30\ngrid.profiles = NLOS-A\n"
      "grid.noise_types = AWGN\ngrid.snr_db = 5,15,25\ngrid.samples = 4\n"
      "model.kind = cnn\ncnn.filters = 4\n"
      "train.max_epochs = 2\ntrain.batch_size = 4\n"
      "eval.timing_reps = 1\n");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream is(p);
  std::size_t n = 0;
  for (std::string l; std::getline(is, l);) ++n;
  return n;
}

}  // namespace

TEST(Generate, OneFilePerScenarioPlusManifest) {
  TempDir dir("gen");
  const Manifest m = cmd_generate(small_run(), dir.path(), 2);
  ASSERT_EQ(m.entries.size(), 6u);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path())) files += e.is_regular_file();
  EXPECT_EQ(files, 7u);
  const Manifest back = Manifest::load(dir / "manifest.json");
  ASSERT_EQ(back.entries.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(back.entries[i].file, m.entries[i].file);
    EXPECT_EQ(back.entries[i].samples, 4u);
    EXPECT_EQ(back.entries[i].scenario.id(), m.entries[i].scenario.id());
  }
  EXPECT_EQ(load_manifest_datasets(dir / "manifest.json").samples.size(), 24u);
}

TEST(Generate, DeterministicAcrossRunsAndJobCounts) {
  TempDir a("gen_a"), b("gen_b");
  const Manifest ma = cmd_generate(small_run(), a.path(), 1);
  cmd_generate(small_run(), b.path(), 4);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  for (const auto& e : ma.entries) EXPECT_EQ(slurp(a / e.file), slurp(b / e.file)) << e.file;
}

TEST(Generate, ScenariosSharingChannelsDifferOnlyInNoise) {
  TempDir dir("gen_share");
  RunConfig c = small_run();
  c.grid.velocities = {10.0};
  const Manifest m = cmd_generate(c, dir.path());
  ASSERT_EQ(m.entries.size(), 3u);
  const CsiDataset lo = load_dataset(dir / m.entries[0].file);
  const CsiDataset hi = load_dataset(dir / m.entries[2].file);
  EXPECT_EQ(lo.samples[0].target, hi.samples[0].target);
  EXPECT_NE(lo.samples[0].history, hi.samples[0].history);
}

TEST(Generate, RejectsEmptyGrid) {
  TempDir dir("gen_empty");
  RunConfig c = small_run();
  c.grid.velocities.clear();
  EXPECT_ERROR_CODE(cmd_generate(c, dir.path()), ErrorCode::kInvalidConfig);
  c = small_run();
  c.grid.samples = 0;
  EXPECT_ERROR_CODE(cmd_generate(c, dir.path()), ErrorCode::kInvalidConfig);
}

TEST(Manifest, DetectsTamperedFiles) {
  TempDir dir("gen_tamper");
  const Manifest m = cmd_generate(small_run(), dir.path());
  fs::remove(dir / m.entries[1].file);
  EXPECT_ERROR_CODE(Manifest::load(dir / "manifest.json"), ErrorCode::kIoError);
  std::ofstream(dir / "broken.json") << "{not json";
  EXPECT_ERROR_CODE(Manifest::load(dir / "broken.json"), ErrorCode::kIoError);
}

TEST(Train, NpIsRejected) {
  TempDir dir("train_np");
  RunConfig c = small_run();
  cmd_generate(c, dir / "data");
  c.model.kind = ModelKind::kNp;
  EXPECT_ERROR_CODE(cmd_train(c, dir / "data" / "manifest.json", dir / "out"),
                    ErrorCode::kConfigError);
}

TEST(Train, SystemMismatchIsRejected) {
  TempDir dir("train_sys");
  RunConfig c = small_run();
  cmd_generate(c, dir / "data");
  c.model.system.n_sc = 4;
  EXPECT_ERROR_CODE(cmd_train(c, dir / "data" / "manifest.json", dir / "out"),
                    ErrorCode::kConfigError);
}

TEST(Pipeline, TrainEvaluateReportAreReproducible) {
  TempDir dir("pipe");
  const RunConfig c = small_run();
  cmd_generate(c, dir / "data");
  const fs::path manifest = dir / "data" / "manifest.json";
  std::vector<std::string> ckpt_bytes;
  for (const char* run : {"r1", "r2"}) {
    const auto tr = cmd_train(c, manifest, dir / run);
    EXPECT_EQ(tr.history.epochs(), 2u);
    ckpt_bytes.push_back(slurp(tr.checkpoint));
    const auto recs = cmd_evaluate(c, {tr.checkpoint}, manifest, dir / run / "eval", 2);
    EXPECT_EQ(recs.size(), 12u);  // (np, cnn) x 6 scenarios
  }
  EXPECT_EQ(ckpt_bytes[0], ckpt_bytes[1]);
  for (const char* f : {"evaluation.csv", "ranks.csv", "efficiency.csv", "acf.csv", "stamp.csv"}) {
    EXPECT_EQ(slurp(dir / "r1" / "eval" / f), slurp(dir / "r2" / "eval" / f)) << f;
  }
  EXPECT_EQ(count_lines(dir / "r1" / "eval" / "timing.csv"), 3u);

  cmd_report(dir / "r1" / "eval", dir / "report");
  // Header plus (np, cnn) x 2 velocities.
  EXPECT_EQ(count_lines(dir / "report" / "nmse_vs_velocity.csv"), 5u);
  EXPECT_EQ(count_lines(dir / "report" / "nmse_vs_snr.csv"), 7u);
  EXPECT_TRUE(fs::exists(dir / "report" / "acf_stem.csv"));
  EXPECT_TRUE(fs::exists(dir / "report" / "summary.txt"));
  const std::string vel = slurp(dir / "report" / "nmse_vs_velocity.csv");
  EXPECT_NE(vel.find(",trained"), std::string::npos);
}

TEST(Evaluate, DuplicateCheckpointIdsAreRejected) {
  TempDir dir("eval_dup");
  const RunConfig c = small_run();
  cmd_generate(c, dir / "data");
  const auto tr = cmd_train(c, dir / "data" / "manifest.json", dir / "out");
  EXPECT_ERROR_CODE(
      cmd_evaluate(c, {tr.checkpoint, tr.checkpoint}, dir / "data" / "manifest.json", dir / "eval"),
      ErrorCode::kDuplicateModel);
}

TEST(Report, MissingEvaluationTable) {
  TempDir dir("rep");
  EXPECT_ERROR_CODE(cmd_report(dir.path(), dir / "out"), ErrorCode::kMissingData);
}
