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

#include "csi4cast/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csi4cast/kernels.hpp"
#include "csi4cast/noise.hpp"
#include "csi4cast/rng.hpp"

namespace csi4cast {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = std::numbers::pi;
}  // namespace

double PathSet::total_power() const {
  double acc = 0.0;
  for (const auto& p : paths) acc += std::norm(p.gain);
  return acc;
}

double PathSet::rms_delay_spread() const {
  const double power = total_power();
  if (!(power > 0.0)) return 0.0;
  double mean = 0.0, second = 0.0;
  for (const auto& p : paths) {
    const double w = std::norm(p.gain) / power;
    mean += w * p.delay;
    second += w * p.delay * p.delay;
  }
  return std::sqrt(std::max(0.0, second - mean * mean));
}

std::size_t default_path_count(ChannelProfile profile) {
  return profile == ChannelProfile::kNlosB ? 16 : 12;
}

double default_k_factor_db(ChannelProfile profile) {
  switch (profile) {
    case ChannelProfile::kLosD: return 10.0;
    case ChannelProfile::kLosE: return 13.0;
    default: return 0.0;
  }
}

double antenna_phase(std::size_t m, std::size_t n_tx, double azimuth, double elevation) {
  const bool dual_pol = n_tx % 2 == 0;
  const std::size_t elements = dual_pol ? n_tx / 2 : n_tx;
  std::size_t rows = 1;
  for (std::size_t r = 1; r * r <= elements; ++r)
    if (elements % r == 0) rows = r;
  const std::size_t cols = elements / rows;
  const std::size_t pol = m / elements;
  const std::size_t e = m % elements;
  const double r = static_cast<double>(e / cols);
  const double c = static_cast<double>(e % cols);
  // Half-wavelength spacing: pi * (column * u + row * v) with direction cosines (u, v).
  const double u = std::sin(azimuth) * std::cos(elevation);
  const double v = std::sin(elevation);
  return kPi * (c * u + r * v) + (pol == 1 ? kPi / 2.0 : 0.0);
}

PathSet generate_path_set(const ScenarioDescriptor& scenario, const SystemConfig& config,
                          std::uint64_t rng_seed, const PathSetOptions& options) {
  if (!(scenario.delay_spread > 0.0)) {
    throw Error(ErrorCode::kInvalidScenario, "delay spread must be positive");
  }
  const std::size_t n_paths =
      options.n_paths > 0 ? options.n_paths : default_path_count(scenario.channel_profile);
  if (n_paths < 2) throw Error(ErrorCode::kInvalidScenario, "at least two paths are required");

  PathSet set;
  set.los = is_los(scenario.channel_profile);
  set.k_factor_db =
      set.los ? options.k_factor_db.value_or(default_k_factor_db(scenario.channel_profile)) : 0.0;
  set.paths.resize(n_paths);

  // Angles come from a per-profile table so every sample of a profile shares its geometry.
  Engine angles = make_engine(static_cast<std::uint64_t>(scenario.channel_profile) + 1,
                              stream::kProfileAngles);
  for (auto& p : set.paths) {
    p.azimuth = (uniform01(angles) - 0.5) * kPi;
    p.elevation = (uniform01(angles) - 0.5) * kPi / 2.0;
  }

  Engine rng = make_engine(rng_seed, stream::kPaths);
  const std::size_t first_diffuse = set.los ? 1 : 0;
  std::vector<double> raw_delay(n_paths, 0.0);
  for (std::size_t i = first_diffuse; i < n_paths; ++i) {
    raw_delay[i] = -std::log(1.0 - uniform01(rng));
  }
  if (!set.los) {
    const double first = *std::min_element(raw_delay.begin(), raw_delay.end());
    for (auto& d : raw_delay) d -= first;
  }
  std::vector<double> power(n_paths, 0.0);
  double diffuse_total = 0.0;
  for (std::size_t i = first_diffuse; i < n_paths; ++i) {
    power[i] = std::exp(-raw_delay[i]) * -std::log(1.0 - uniform01(rng));
    diffuse_total += power[i];
  }
  const double k_lin = set.los ? std::pow(10.0, set.k_factor_db / 10.0) : 0.0;
  const double diffuse_share = set.los ? 1.0 / (k_lin + 1.0) : 1.0;
  if (set.los) power[0] = k_lin / (k_lin + 1.0);
  for (std::size_t i = first_diffuse; i < n_paths; ++i) power[i] *= diffuse_share / diffuse_total;

  const double max_doppler = scenario.velocity / kSpeedOfLight * config.carrier_freq;
  for (std::size_t i = 0; i < n_paths; ++i) {
    auto& p = set.paths[i];
    p.gain = std::polar(std::sqrt(power[i]), 2.0 * kPi * uniform01(rng));
    p.doppler = max_doppler * std::cos(2.0 * kPi * uniform01(rng));
    p.delay = raw_delay[i];
  }

  // Rescale so the power-weighted RMS spread hits the target exactly.
  const double raw_rms = set.rms_delay_spread();
  if (!(raw_rms > 0.0)) throw Error(ErrorCode::kInvalidScenario, "degenerate delay profile");
  const double scale = scenario.delay_spread / raw_rms;
  for (auto& p : set.paths) p.delay *= scale;
  return set;
}

CsiSequence synthesize_csi_sequence(const PathSet& paths, const SystemConfig& config,
                                    std::size_t n_steps, double t0) {
  const std::size_t n_sc = config.total_subcarriers();
  const std::size_t P = paths.paths.size();
  std::vector<cdouble> gain(config.n_tx * P);
  std::vector<double> doppler(P), delay(P), times(n_steps), freqs(n_sc);
  for (std::size_t p = 0; p < P; ++p) {
    const auto& path = paths.paths[p];
    doppler[p] = path.doppler;
    delay[p] = path.delay;
    for (std::size_t m = 0; m < config.n_tx; ++m) {
      gain[m * P + p] =
          path.gain * std::polar(1.0, antenna_phase(m, config.n_tx, path.azimuth, path.elevation));
    }
  }
  for (std::size_t i = 0; i < n_steps; ++i) {
    times[i] = t0 + static_cast<double>(i) * config.report_interval;
  }
  for (std::size_t k = 0; k < n_sc; ++k) freqs[k] = static_cast<double>(k) * config.sc_spacing;

  CsiSequence out(config.n_tx, n_steps, n_sc);
  kernels::tdl_synthesize({config.n_tx, P, gain, doppler, delay, times, freqs}, out.data());
  out.timestamps() = times;
  return out;
}

std::pair<CsiSequence, CsiSequence> split_bands(const CsiSequence& seq, const SystemConfig& config) {
  if (seq.n_sc() != config.total_subcarriers()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sequence has " + std::to_string(seq.n_sc()) + " subcarriers, grid needs " +
                    std::to_string(config.total_subcarriers()));
  }
  if (config.duplex == Duplex::kTdd) return {seq, seq};
  return {seq.subcarrier_slice(0, config.n_sc),
          seq.subcarrier_slice(config.n_sc + config.n_guard, config.n_sc)};
}

std::pair<CsiSequence, CsiSequence> synthesize_clean_pair(const ScenarioDescriptor& scenario,
                                                          const SystemConfig& config,
                                                          std::uint64_t sample_seed) {
  const PathSet paths = generate_path_set(scenario, config, sample_seed);
  const CsiSequence full =
      synthesize_csi_sequence(paths, config, config.hist_len + config.pred_len, 0.0);
  auto [ul, dl] = split_bands(full, config);
  return {ul.time_slice(0, config.hist_len), dl.time_slice(config.hist_len, config.pred_len)};
}

namespace {

CsiSequence corrupt(const CsiSequence& clean, NoiseType type, double degree,
                    const NoiseParams& calibrated, std::uint64_t noise_seed, bool impute) {
  switch (type) {
    case NoiseType::kNone: return clean;
    case NoiseType::kAwgn: return apply_awgn(clean, degree, noise_seed);
    case NoiseType::kPhase: return apply_phase_noise(clean, calibrated.sigma_rad, noise_seed);
    case NoiseType::kBurst: return apply_burst_noise(clean, calibrated.burst, noise_seed);
    case NoiseType::kPacketDrop: {
      auto [noisy, mask] = apply_packet_drop(clean, degree, noise_seed);
      return impute ? impute_dropped(noisy, mask) : noisy;
    }
  }
  return clean;
}

}  // namespace

CsiDataset make_dataset(const ScenarioDescriptor& scenario, const SystemConfig& config,
                        std::size_t n_samples, std::uint64_t base_seed,
                        const DatasetOptions& options) {
  config.validate();
  scenario.validate();
  if (n_samples < 1) throw Error(ErrorCode::kInvalidConfig, "n_samples must be >= 1");
  if (scenario.duplex != config.duplex) {
    throw Error(ErrorCode::kInvalidScenario, "scenario and system duplex modes differ");
  }

  CsiDataset ds;
  ds.config = config;
  ds.samples.resize(n_samples);
  const long n = static_cast<long>(n_samples);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto& s = ds.samples[static_cast<std::size_t>(i)];
    s.seed = base_seed + static_cast<std::uint64_t>(i);
    s.scenario = scenario;
    auto [history, target] = synthesize_clean_pair(scenario, config, s.seed);
    s.history = std::move(history);
    s.target = std::move(target);
    if (options.awgn_snr_range && scenario.noise_type == NoiseType::kAwgn) {
      Engine rng = make_engine(s.seed, stream::kNoiseDegree);
      const auto [lo, hi] = *options.awgn_snr_range;
      s.scenario.noise_degree = lo + (hi - lo) * uniform01(rng);
    }
  }

  NoiseParams calibrated;
  if (scenario.noise_type == NoiseType::kPhase || scenario.noise_type == NoiseType::kBurst) {
    std::vector<CsiSequence> reference;
    for (std::size_t i = 0; i < std::min(n_samples, options.calibration_samples); ++i) {
      reference.push_back(ds.samples[i].history);
    }
    calibrated = calibrate_noise_degree(scenario.noise_type, scenario.noise_degree, reference,
                                        options.calibration_tol_db, base_seed);
  }

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto& s = ds.samples[static_cast<std::size_t>(i)];
    s.history = corrupt(s.history, s.scenario.noise_type, s.scenario.noise_degree, calibrated,
                        derive_seed(s.seed, stream::kNoise), options.impute_drops);
  }
  return ds;
}

CsiSequence redraw_history_noise(const CsiSample& sample, const SystemConfig& config,
                                 std::uint64_t epoch, bool impute_drops) {
  const NoiseType type = sample.scenario.noise_type;
  if (type == NoiseType::kPhase || type == NoiseType::kBurst) {
    throw Error(ErrorCode::kConfigError, "fresh noise supports NONE, AWGN and PACKET_DROP only");
  }
  auto [history, target] = synthesize_clean_pair(sample.scenario, config, sample.seed);
  const std::uint64_t seed = derive_seed(derive_seed(sample.seed, stream::kFreshNoise), epoch);
  return corrupt(history, type, sample.scenario.noise_degree, {}, seed, impute_drops);
}

}  // namespace csi4cast
