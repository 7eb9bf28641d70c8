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

#include "csi4cast/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "csi4cast/rng.hpp"

namespace csi4cast {

BurstParams burst_params_for_degree(double nd, std::size_t length) {
  BurstParams p;
  p.amplitude = kBurstAmplitudePerDegree * nd;
  p.occur_prob = std::min(1.0, kBurstProbPerDegree * nd);
  p.length = length;
  return p;
}

double snr_to_sigma2(const CsiSequence& clean, double snr_db) {
  const double energy = frobenius_norm_sq(clean);
  if (!(energy > 0.0)) throw Error(ErrorCode::kZeroSignal, "clean sequence has zero energy");
  return energy / static_cast<double>(clean.numel()) * std::pow(10.0, -snr_db / 10.0);
}

CsiSequence apply_awgn(const CsiSequence& clean, double snr_db, std::uint64_t rng_seed) {
  if (std::isinf(snr_db) && snr_db > 0) return clean;
  const double sigma2 = snr_to_sigma2(clean, snr_db);
  Engine rng(derive_seed(rng_seed, stream::kNoise));
  CsiSequence out = clean;
  for (auto& v : out.data()) v += complex_normal(rng, sigma2);
  return out;
}

CsiSequence apply_phase_noise(const CsiSequence& clean, double sigma_rad, std::uint64_t rng_seed) {
  if (sigma_rad < 0) throw Error(ErrorCode::kInvalidParams, "phase sigma must be nonnegative");
  CsiSequence out = clean;
  if (sigma_rad == 0.0) return out;
  Engine rng(derive_seed(rng_seed, stream::kNoise));
  for (auto& v : out.data()) {
    const double delta = sigma_rad * standard_normal(rng);
    v = std::polar(std::abs(v), std::arg(v) + delta);
  }
  return out;
}

double burst_bell(double tau, std::size_t length) {
  const double c = (static_cast<double>(length) - 1.0) / 2.0;
  return std::exp(-(tau - c) * (tau - c) / 2.0);
}

CsiSequence apply_burst_noise(const CsiSequence& clean, const BurstParams& params,
                              std::uint64_t rng_seed) {
  if (!(params.occur_prob >= 0.0 && params.occur_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "burst probability must lie in [0, 1]");
  }
  if (params.length < 1) throw Error(ErrorCode::kInvalidParams, "burst length must be >= 1");
  CsiSequence out = clean;
  const std::size_t L = clean.len();
  // Amplitude is relative to the RMS element of the clean input, as with the AWGN variance.
  const double rms =
      clean.numel() > 0 ? std::sqrt(frobenius_norm_sq(clean) / static_cast<double>(clean.numel()))
                        : 0.0;
  Engine rng(derive_seed(rng_seed, stream::kNoise));
  std::vector<cdouble> eps(params.length);
  for (std::size_t m = 0; m < clean.n_tx(); ++m) {
    for (std::size_t k = 0; k < clean.n_sc(); ++k) {
      // Fixed draw count per stream keeps streams aligned across parameter values.
      const double u = uniform01(rng);
      for (auto& e : eps) e = complex_normal(rng, 1.0);

      // Truncated geometric start: P(s = t) = (1 - p)^(t-1) p for t = 1..L.
      std::size_t start = L;
      double cum = 0.0, survive = 1.0;
      for (std::size_t t = 0; t < L; ++t) {
        cum += survive * params.occur_prob;
        survive *= 1.0 - params.occur_prob;
        if (u < cum) {
          start = t;
          break;
        }
      }
      if (start == L) continue;
      const std::size_t span = std::min(L - start, params.length);
      for (std::size_t tau = 0; tau < span; ++tau) {
        const double bell =
            rms * params.amplitude * burst_bell(static_cast<double>(tau), params.length);
        out.at(m, start + tau, k) += bell * eps[tau];
      }
    }
  }
  return out;
}

std::pair<CsiSequence, DropMask> apply_packet_drop(const CsiSequence& clean, double drop_prob,
                                                   std::uint64_t rng_seed) {
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "drop probability must lie in [0, 1]");
  }
  Engine rng(derive_seed(rng_seed, stream::kNoise));
  DropMask mask(clean.len(), false);
  for (std::size_t t = 0; t < clean.len(); ++t) mask[t] = uniform01(rng) < drop_prob;
  CsiSequence out = clean;
  for (std::size_t m = 0; m < clean.n_tx(); ++m)
    for (std::size_t t = 0; t < clean.len(); ++t)
      if (mask[t])
        for (std::size_t k = 0; k < clean.n_sc(); ++k) out.at(m, t, k) = 0.0;
  return {std::move(out), std::move(mask)};
}

CsiSequence impute_dropped(const CsiSequence& noisy, const DropMask& mask) {
  if (mask.size() != noisy.len()) {
    throw Error(ErrorCode::kDimensionMismatch, "drop mask length does not match sequence");
  }
  const auto first_seen = std::find(mask.begin(), mask.end(), false);
  CsiSequence out = noisy;
  if (first_seen == mask.end()) {
    std::fill(out.data().begin(), out.data().end(), cdouble{0.0, 0.0});
    return out;
  }
  std::size_t source = static_cast<std::size_t>(first_seen - mask.begin());
  for (std::size_t t = 0; t < noisy.len(); ++t) {
    if (!mask[t]) {
      source = t;
      continue;
    }
    for (std::size_t m = 0; m < noisy.n_tx(); ++m)
      for (std::size_t k = 0; k < noisy.n_sc(); ++k) out.at(m, t, k) = noisy.at(m, source, k);
  }
  return out;
}

namespace {
double noise_energy(const CsiSequence& clean, const CsiSequence& noisy) {
  if (clean.n_tx() != noisy.n_tx() || clean.len() != noisy.len() || clean.n_sc() != noisy.n_sc()) {
    throw Error(ErrorCode::kDimensionMismatch, "clean and noisy shapes differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < clean.numel(); ++i) acc += std::norm(noisy.data()[i] - clean.data()[i]);
  return acc;
}
}  // namespace

double empirical_snr(const CsiSequence& clean, const CsiSequence& noisy, ZeroNoisePolicy policy) {
  const double noise = noise_energy(clean, noisy);
  if (noise == 0.0) {
    if (policy == ZeroNoisePolicy::kThrow) {
      throw Error(ErrorCode::kZeroNoise, "noisy sequence equals the clean one");
    }
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(frobenius_norm_sq(clean) / noise);
}

double pooled_snr(const std::vector<CsiSequence>& clean, const std::vector<CsiSequence>& noisy) {
  if (clean.size() != noisy.size()) throw Error(ErrorCode::kDimensionMismatch, "set sizes differ");
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    signal += frobenius_norm_sq(clean[i]);
    noise += noise_energy(clean[i], noisy[i]);
  }
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

namespace {

double measure(NoiseType type, double degree, const std::vector<CsiSequence>& reference,
               std::uint64_t rng_seed) {
  std::vector<CsiSequence> noisy;
  noisy.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const std::uint64_t seed = derive_seed(rng_seed, i);
    if (type == NoiseType::kPhase) {
      noisy.push_back(apply_phase_noise(reference[i], degree, seed));
    } else {
      noisy.push_back(apply_burst_noise(reference[i], burst_params_for_degree(degree), seed));
    }
  }
  return pooled_snr(reference, noisy);
}

NoiseParams params_for(NoiseType type, double degree) {
  NoiseParams p;
  if (type == NoiseType::kPhase) {
    p.sigma_rad = degree;
  } else {
    p.burst = burst_params_for_degree(degree);
  }
  p.degree = degree;
  return p;
}

}  // namespace

NoiseParams calibrate_noise_degree(NoiseType type, double target_snr_db,
                                   const std::vector<CsiSequence>& reference, double tol_db,
                                   std::uint64_t rng_seed) {
  if (type != NoiseType::kPhase && type != NoiseType::kBurst) {
    throw Error(ErrorCode::kInvalidParams, "calibration applies to PHASE and BURST noise only");
  }
  if (reference.empty()) throw Error(ErrorCode::kInvalidParams, "empty calibration reference");
  constexpr int kMaxIterations = 60;

  // SNR decreases monotonically in the degree; find [lo, hi] with snr(hi) <= target.
  double lo = 0.0;
  double hi = type == NoiseType::kPhase ? std::numbers::pi : 1.0;
  if (type == NoiseType::kBurst) {
    int grow = 0;
    while (measure(type, hi, reference, rng_seed) > target_snr_db) {
      lo = hi;
      hi *= 2.0;
      if (++grow > kMaxIterations) {
        throw Error(ErrorCode::kCalibrationDiverged, "burst degree bracket did not close");
      }
    }
  } else if (measure(type, hi, reference, rng_seed) > target_snr_db + tol_db) {
    throw Error(ErrorCode::kCalibrationDiverged, "target SNR below the phase-noise floor");
  }

  for (int it = 0; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double snr = measure(type, mid, reference, rng_seed);
    if (std::abs(snr - target_snr_db) <= tol_db) return params_for(type, mid);
    if (snr > target_snr_db) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw Error(ErrorCode::kCalibrationDiverged,
              "no degree within tolerance after " + std::to_string(kMaxIterations) + " iterations");
}

NoiseParams calibrate_noise_degree(NoiseType type, double target_snr_db,
                                   const CsiDataset& reference, double tol_db,
                                   std::uint64_t rng_seed) {
  std::vector<CsiSequence> histories;
  histories.reserve(reference.samples.size());
  for (const auto& s : reference.samples) histories.push_back(s.history);
  return calibrate_noise_degree(type, target_snr_db, histories, tol_db, rng_seed);
}

}  // namespace csi4cast
