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

#include <cmath>
#include <span>
#include <vector>

#include "csi4cast/core_types.hpp"

namespace csi4cast {

/// sum |pred - target|^2 / sum |target|^2 over antennas, steps and subcarriers.
double nmse_metric(const CsiSequence& pred, const CsiSequence& target);

/// Per-sample nmse_metric averaged over the batch.
double nmse_loss(const std::vector<CsiSequence>& pred, const std::vector<CsiSequence>& target);

inline double to_db(double x) { return 10.0 * std::log10(x); }

// Beam vectors are laid out subcarrier-major: h[k * n_ant + m].

/// (1/N) sum_k log2(1 + |h_k|^2 / noise_var).
double spectral_efficiency(std::span<const cdouble> h, std::size_t n_ant, double noise_var);

/// (1/N) sum_k log2(1 + |h_hat_k^H h_k|^2 / (noise_var |h_hat_k|^2)); zero
/// predictions contribute nothing.
double predicted_se(std::span<const cdouble> h_hat, std::span<const cdouble> h, std::size_t n_ant,
                    double noise_var);

/// Beam vectors of step t of `seq`.
std::vector<cdouble> beam_vectors(const CsiSequence& seq, std::size_t t);

/// noise_var placing the mean per-subcarrier channel power of `target` at `snr_db`.
double se_noise_var(const CsiSequence& target, double snr_db = 10.0);

/// Step-averaged (predicted SE, ground-truth SE) of one predicted window.
std::pair<double, double> sequence_se(const CsiSequence& pred, const CsiSequence& target,
                                      double noise_var);

}  // namespace csi4cast
