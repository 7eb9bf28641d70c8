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

// Command-line front end: generate | train | evaluate | report.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "csi4cast/commands.hpp"
#include "csi4cast/runtime.hpp"

using namespace csi4cast;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value config file");
  cmd->add_option("--seed", c.seed, "run seed (overrides run.seed)");
  cmd->add_option("--jobs", c.jobs, "worker threads for scenario-level parallelism")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--set", c.overrides, "extra key=value settings applied after the file");
}

RunConfig resolve(const Common& c, const std::string& preset = {}) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (!preset.empty()) cfg.apply("grid.preset", preset);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--set needs key=value");
    cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path data_root() {
  const char* env = std::getenv("CSI4CAST_DATA_DIR");
  return env && *env ? fs::path(env) : fs::path("data");
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"CSI prediction benchmark workbench"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, rep_c;
  std::string gen_out, gen_preset;
  auto* gen = app.add_subcommand("generate", "write scenario datasets and a manifest");
  add_common(gen, gen_c);
  gen->add_option("--preset", gen_preset, "grid preset applied after --config: train | regular | robustness | generalization");
  gen->add_option("--out", gen_out, "output directory (default $CSI4CAST_DATA_DIR/<track>)");

  std::string train_manifest, train_out, train_model;
  auto* tr = app.add_subcommand("train", "train one model on a manifest");
  add_common(tr, train_c);
  tr->add_option("--manifest", train_manifest, "dataset manifest")->required();
  tr->add_option("--model", train_model, "csi4cast | rnn | cnn (overrides model.kind)");
  tr->add_option("--out", train_out, "output directory")->required();

  std::string eval_manifest, eval_out;
  std::vector<std::string> eval_ckpts;
  auto* ev = app.add_subcommand("evaluate", "evaluate NP and checkpoints on a manifest");
  add_common(ev, eval_c);
  ev->add_option("--manifest", eval_manifest, "dataset manifest")->required();
  ev->add_option("--checkpoint", eval_ckpts, "checkpoint files");
  ev->add_option("--out", eval_out, "output directory")->required();

  std::string rep_in, rep_out;
  auto* rep = app.add_subcommand("report", "aggregate an evaluation directory into curve tables");
  add_common(rep, rep_c);
  rep->add_option("--eval-dir", rep_in, "directory written by evaluate")->required();
  rep->add_option("--out", rep_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const RunConfig cfg = resolve(gen_c, gen_preset);
      const fs::path out = gen_out.empty() ? data_root() / cfg.grid.track : fs::path(gen_out);
      const Manifest m = cmd_generate(cfg, out, gen_c.jobs);
      std::cout << "wrote " << m.entries.size() << " scenario files to " << out.string() << "\n";
    } else if (tr->parsed()) {
      RunConfig cfg = resolve(train_c);
      if (!train_model.empty()) cfg.apply("model.kind", train_model);
      const auto r = cmd_train(cfg, train_manifest, train_out, [](const EpochReport& e) {
        std::cout << "epoch " << e.epoch << "  train_loss " << e.train_loss << "  val_nmse "
                  << e.val_nmse << "  lr " << e.lr << "\n";
      });
      std::cout << "best epoch " << r.history.best_epoch << "  val_nmse "
                << r.history.best_val_nmse() << "\n"
                << "checkpoint " << r.checkpoint.string() << "\n";
    } else if (ev->parsed()) {
      const RunConfig cfg = resolve(eval_c);
      std::vector<fs::path> ckpts(eval_ckpts.begin(), eval_ckpts.end());
      const auto records = cmd_evaluate(cfg, ckpts, eval_manifest, eval_out, eval_c.jobs);
      std::cout << "wrote " << records.size() << " evaluation records to " << eval_out << "\n";
    } else if (rep->parsed()) {
      const RunConfig cfg = resolve(rep_c);
      cmd_report(rep_in, rep_out, cfg.train_velocities);
      std::cout << "wrote report tables to " << rep_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
