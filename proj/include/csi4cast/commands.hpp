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

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "csi4cast/config.hpp"
#include "csi4cast/evaluation.hpp"

namespace csi4cast {

namespace fs = std::filesystem;

struct ManifestEntry {
  ScenarioDescriptor scenario;
  std::string file;  // relative to the manifest's directory
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

struct Manifest {
  std::string track;
  std::uint64_t seed = 0;
  std::string config_hash;
  SystemConfig system;
  std::vector<ManifestEntry> entries;

  void save(const fs::path& path) const;
  /// Parses the manifest and checks that every file exists and its header
  /// matches the entry's scenario and the manifest's system config.
  static Manifest load(const fs::path& path);
};

/// Writes one dataset file per grid scenario and manifest.json (written last) into `out_dir`.
Manifest cmd_generate(const RunConfig& cfg, const fs::path& out_dir, int jobs = 1);

/// All samples of every file listed in the manifest, in manifest order.
CsiDataset load_manifest_datasets(const fs::path& manifest_path, int jobs = 1);

struct TrainResult {
  fs::path checkpoint;
  fs::path history_csv;
  TrainHistory history;
};

/// Trains cfg.model.kind on the concatenated manifest datasets; writes
/// <kind>.ckpt and <kind>_history.csv into `out_dir`.
TrainResult cmd_train(const RunConfig& cfg, const fs::path& manifest_path, const fs::path& out_dir,
                      const std::function<void(const EpochReport&)>& on_epoch = {});

/// Evaluates NP plus every checkpoint on every manifest scenario. Writes
/// evaluation.csv, ranks.csv, efficiency.csv, timing.csv, acf.csv and stamp.csv.
std::vector<EvaluationRecord> cmd_evaluate(const RunConfig& cfg,
                                           const std::vector<fs::path>& checkpoints,
                                           const fs::path& manifest_path, const fs::path& out_dir,
                                           int jobs = 1);

/// Aggregated curve tables from an evaluation directory. Throws kMissingData
/// when evaluation.csv is absent.
void cmd_report(const fs::path& eval_dir, const fs::path& out_dir,
                const std::vector<double>& train_velocities = {1.0, 10.0, 30.0});

}  // namespace csi4cast
