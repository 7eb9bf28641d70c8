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
#include <string>
#include <vector>

#include "csi4cast/checkpoint.hpp"
#include "csi4cast/training.hpp"

namespace csi4cast {

/// Scenario grid of one dataset track. Every noise type contributes one
/// scenario per degree in its list, so the grid size is
/// |velocities| * |delay_spreads| * |profiles| * sum over noise types of |degrees|.
struct GridConfig {
  std::string track = "regular";
  std::vector<double> velocities{1.0, 10.0, 30.0};
  std::vector<double> delay_spreads_ns{30.0, 100.0, 300.0};
  std::vector<std::string> profiles{"NLOS-A", "NLOS-C", "LOS-D"};
  std::vector<std::string> noise_types{"AWGN"};
  std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};  // AWGN, PHASE, BURST
  std::vector<double> drop_probs{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
  std::size_t samples = 20;
  /// Training mode: AWGN only, one file per channel triple, SNR drawn per sample.
  bool training = false;
  double train_snr_min = 0.0;
  double train_snr_max = 25.0;

  std::vector<ScenarioDescriptor> scenarios(Duplex duplex) const;
};

/// Desk-scale grids: "train", "regular", "robustness", "generalization".
GridConfig grid_preset(const std::string& name);

struct RunConfig {
  std::uint64_t seed = 0;
  ModelSpec model;
  TrainConfig train;
  GridConfig grid;
  double se_snr_db = 10.0;
  std::size_t timing_reps = 20;
  std::size_t eval_batch = 64;
  /// Velocities the models were trained on; marks interpolation in reports.
  std::vector<double> train_velocities{1.0, 10.0, 30.0};

  /// Every key with its current value, in a fixed order.
  kv::Entries entries() const;
  /// Throws kInvalidConfig for unknown keys or unparsable values.
  void apply(const std::string& key, const std::string& value);

  std::string to_text() const;
  /// "key = value" lines; '#' starts a comment. "grid.preset" loads a preset first.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
};

/// FNV-1a 64-bit digest, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace csi4cast
