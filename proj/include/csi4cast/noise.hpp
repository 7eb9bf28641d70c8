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
#include <utility>
#include <vector>

#include "csi4cast/core_types.hpp"

namespace csi4cast {

struct BurstParams {
  double amplitude = 0.0;    // A_burst
  double occur_prob = 0.0;   // P_burst
  std::size_t length = 1;    // L_burst, slots
};

struct NoiseParams {
  double snr_db = 0.0;       // AWGN
  double sigma_rad = 0.0;    // phase perturbation standard deviation
  BurstParams burst;
  double drop_prob = 0.0;
  double degree = 0.0;       // burst noise degree nd that produced `burst`
};

/// Per-time-step drop indicator; true means the snapshot was lost.
using DropMask = std::vector<bool>;

inline constexpr double kBurstAmplitudePerDegree = 1.0;  // a0
inline constexpr double kBurstProbPerDegree = 0.05;      // p0
inline constexpr std::size_t kDefaultBurstLength = 4;

BurstParams burst_params_for_degree(double nd, std::size_t length = kDefaultBurstLength);

/// Per-element complex noise variance that realizes `snr_db` against `clean`.
double snr_to_sigma2(const CsiSequence& clean, double snr_db);

/// Adds circular complex Gaussian noise. snr_db == +inf returns the input.
CsiSequence apply_awgn(const CsiSequence& clean, double snr_db, std::uint64_t rng_seed);

CsiSequence apply_phase_noise(const CsiSequence& clean, double sigma_rad, std::uint64_t rng_seed);

/// Bell-shaped window g(tau) = exp(-(tau - c)^2 / 2), c = (length - 1) / 2.
double burst_bell(double tau, std::size_t length);

/// At most one burst per (antenna, subcarrier) stream. The amplitude is relative
/// to the RMS element magnitude of `clean`.
CsiSequence apply_burst_noise(const CsiSequence& clean, const BurstParams& params,
                              std::uint64_t rng_seed);

std::pair<CsiSequence, DropMask> apply_packet_drop(const CsiSequence& clean, double drop_prob,
                                                   std::uint64_t rng_seed);

/// Forward fill from the last observed snapshot; leading drops take the first
/// observed snapshot; an all-dropped window stays zero.
CsiSequence impute_dropped(const CsiSequence& noisy, const DropMask& mask);

enum class ZeroNoisePolicy { kThrow, kInfinity };

/// 10 log10(|H|^2 / |noisy - H|^2).
double empirical_snr(const CsiSequence& clean, const CsiSequence& noisy,
                     ZeroNoisePolicy policy = ZeroNoisePolicy::kThrow);

/// Pooled SNR over a set: total signal energy over total noise energy.
double pooled_snr(const std::vector<CsiSequence>& clean, const std::vector<CsiSequence>& noisy);

/// Bisects the scalar degree of PHASE (sigma_rad) or BURST (nd) noise until the
/// pooled SNR over `reference` is within tol_db of the target.
NoiseParams calibrate_noise_degree(NoiseType type, double target_snr_db,
                                   const std::vector<CsiSequence>& reference, double tol_db = 0.25,
                                   std::uint64_t rng_seed = 0);

/// Same as above, calibrated on the dataset's histories.
NoiseParams calibrate_noise_degree(NoiseType type, double target_snr_db,
                                   const CsiDataset& reference, double tol_db = 0.25,
                                   std::uint64_t rng_seed = 0);

}  // namespace csi4cast
