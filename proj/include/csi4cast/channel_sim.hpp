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

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "csi4cast/core_types.hpp"

namespace csi4cast {

/// One propagation path of the tapped-delay-line model.
struct Path {
  double delay = 0.0;      // s
  cdouble gain{0.0, 0.0};  // complex amplitude
  double azimuth = 0.0;    // rad, angle of departure
  double elevation = 0.0;  // rad
  double doppler = 0.0;    // Hz
};

struct PathSet {
  std::vector<Path> paths;
  bool los = false;  // paths[0] is a deterministic line-of-sight ray
  double k_factor_db = 0.0;

  double total_power() const;
  /// Power-weighted RMS delay spread.
  double rms_delay_spread() const;
};

struct PathSetOptions {
  std::size_t n_paths = 0;                  // 0 selects the profile default
  std::optional<double> k_factor_db;        // overrides the LOS profile default
};

/// Paths per profile and LOS K-factor defaults.
std::size_t default_path_count(ChannelProfile profile);
double default_k_factor_db(ChannelProfile profile);

/// Planar-array phase of antenna `m` toward (azimuth, elevation). Even n_tx is
/// treated as two co-located polarizations offset by pi/2.
double antenna_phase(std::size_t m, std::size_t n_tx, double azimuth, double elevation);

PathSet generate_path_set(const ScenarioDescriptor& scenario, const SystemConfig& config,
                          std::uint64_t rng_seed, const PathSetOptions& options = {});

/// Frequency response on the full simulated grid (2*n_sc + n_guard for FDD,
/// n_sc for TDD) at times t0 + i * report_interval.
CsiSequence synthesize_csi_sequence(const PathSet& paths, const SystemConfig& config,
                                    std::size_t n_steps, double t0 = 0.0);

/// (uplink, downlink) bands. TDD returns the input twice.
std::pair<CsiSequence, CsiSequence> split_bands(const CsiSequence& seq, const SystemConfig& config);

struct DatasetOptions {
  /// When set, each sample draws its AWGN SNR uniformly from [first, second] dB.
  std::optional<std::pair<double, double>> awgn_snr_range;
  bool impute_drops = true;
  std::size_t calibration_samples = 32;
  double calibration_tol_db = 0.25;
};

/// Clean history and target for one sample seed; no noise applied.
std::pair<CsiSequence, CsiSequence> synthesize_clean_pair(const ScenarioDescriptor& scenario,
                                                          const SystemConfig& config,
                                                          std::uint64_t sample_seed);

CsiDataset make_dataset(const ScenarioDescriptor& scenario, const SystemConfig& config,
                        std::size_t n_samples, std::uint64_t base_seed,
                        const DatasetOptions& options = {});

/// Re-synthesizes a sample's clean history and corrupts it with a new noise
/// draw for `epoch`. Supports NONE, AWGN and PACKET_DROP scenarios.
CsiSequence redraw_history_noise(const CsiSample& sample, const SystemConfig& config,
                                 std::uint64_t epoch, bool impute_drops = true);

}  // namespace csi4cast
