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

#include "csi4cast/metrics.hpp"

#include <cmath>

namespace csi4cast {

double nmse_metric(const CsiSequence& pred, const CsiSequence& target) {
  if (pred.n_tx() != target.n_tx() || pred.len() != target.len() ||
      pred.n_sc() != target.n_sc()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and target shapes differ");
  }
  double num = 0.0, den = 0.0;
  const auto& p = pred.data();
  const auto& t = target.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += std::norm(p[i] - t[i]);
    den += std::norm(t[i]);
  }
  if (den == 0.0) throw Error(ErrorCode::kZeroTarget, "target is all zero");
  return num / den;
}

double nmse_loss(const std::vector<CsiSequence>& pred, const std::vector<CsiSequence>& target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "batch sizes differ or are empty");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += nmse_metric(pred[i], target[i]);
  return acc / static_cast<double>(pred.size());
}

namespace {
void check_noise_var(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidNoiseVar, "noise variance must be positive");
  }
}
void check_beams(std::size_t size, std::size_t n_ant) {
  if (n_ant == 0 || size % n_ant != 0 || size == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "beam vector length is not a multiple of n_ant");
  }
}
}  // namespace

double spectral_efficiency(std::span<const cdouble> h, std::size_t n_ant, double noise_var) {
  check_noise_var(noise_var);
  check_beams(h.size(), n_ant);
  const std::size_t n = h.size() / n_ant;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double g = 0.0;
    for (std::size_t m = 0; m < n_ant; ++m) g += std::norm(h[k * n_ant + m]);
    acc += std::log2(1.0 + g / noise_var);
  }
  return acc / static_cast<double>(n);
}

double predicted_se(std::span<const cdouble> h_hat, std::span<const cdouble> h, std::size_t n_ant,
                    double noise_var) {
  check_noise_var(noise_var);
  check_beams(h.size(), n_ant);
  if (h_hat.size() != h.size()) throw Error(ErrorCode::kDimensionMismatch, "beam shapes differ");
  const std::size_t n = h.size() / n_ant;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cdouble inner{0.0, 0.0};
    double p = 0.0;
    for (std::size_t m = 0; m < n_ant; ++m) {
      const cdouble a = h_hat[k * n_ant + m];
      inner += std::conj(a) * h[k * n_ant + m];
      p += std::norm(a);
    }
    if (p == 0.0) continue;
    acc += std::log2(1.0 + std::norm(inner) / (noise_var * p));
  }
  return acc / static_cast<double>(n);
}

std::vector<cdouble> beam_vectors(const CsiSequence& seq, std::size_t t) {
  std::vector<cdouble> out(seq.n_sc() * seq.n_tx());
  for (std::size_t k = 0; k < seq.n_sc(); ++k)
    for (std::size_t m = 0; m < seq.n_tx(); ++m) out[k * seq.n_tx() + m] = seq.at(m, t, k);
  return out;
}

double se_noise_var(const CsiSequence& target, double snr_db) {
  const double cells = static_cast<double>(target.len() * target.n_sc());
  const double mean_power = frobenius_norm_sq(target) / cells;
  if (!(mean_power > 0.0)) throw Error(ErrorCode::kZeroTarget, "target is all zero");
  return mean_power / std::pow(10.0, snr_db / 10.0);
}

std::pair<double, double> sequence_se(const CsiSequence& pred, const CsiSequence& target,
                                      double noise_var) {
  if (pred.n_tx() != target.n_tx() || pred.len() != target.len() ||
      pred.n_sc() != target.n_sc()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and target shapes differ");
  }
  double se_hat = 0.0, se = 0.0;
  for (std::size_t t = 0; t < target.len(); ++t) {
    const auto h = beam_vectors(target, t);
    se_hat += predicted_se(beam_vectors(pred, t), h, target.n_tx(), noise_var);
    se += spectral_efficiency(h, target.n_tx(), noise_var);
  }
  const double n = static_cast<double>(target.len());
  return {se_hat / n, se / n};
}

}  // namespace csi4cast
