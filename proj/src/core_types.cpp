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

#include "csi4cast/core_types.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace csi4cast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kZeroSignal: return "ZeroSignal";
    case ErrorCode::kZeroNoise: return "ZeroNoise";
    case ErrorCode::kZeroTarget: return "ZeroTarget";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kCalibrationDiverged: return "CalibrationDiverged";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kEmptyHistory: return "EmptyHistory";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInvalidNoiseVar: return "InvalidNoiseVar";
    case ErrorCode::kDuplicateModel: return "DuplicateModel";
    case ErrorCode::kEmptySubset: return "EmptySubset";
    case ErrorCode::kAllZeroCosts: return "AllZeroCosts";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kMissingData: return "MissingData";
  }
  return "Unknown";
}

std::string_view to_string(Duplex d) { return d == Duplex::kFdd ? "FDD" : "TDD"; }

std::string_view to_string(ChannelProfile p) {
  switch (p) {
    case ChannelProfile::kNlosA: return "NLOS-A";
    case ChannelProfile::kNlosB: return "NLOS-B";
    case ChannelProfile::kNlosC: return "NLOS-C";
    case ChannelProfile::kLosD: return "LOS-D";
    case ChannelProfile::kLosE: return "LOS-E";
  }
  return "?";
}

std::string_view to_string(NoiseType t) {
  switch (t) {
    case NoiseType::kNone: return "NONE";
    case NoiseType::kAwgn: return "AWGN";
    case NoiseType::kPhase: return "PHASE";
    case NoiseType::kBurst: return "BURST";
    case NoiseType::kPacketDrop: return "PACKET_DROP";
  }
  return "?";
}

Duplex parse_duplex(std::string_view s) {
  if (s == "TDD" || s == "tdd") return Duplex::kTdd;
  if (s == "FDD" || s == "fdd") return Duplex::kFdd;
  throw Error(ErrorCode::kInvalidConfig, "unknown duplex mode '" + std::string(s) + "'");
}

ChannelProfile parse_profile(std::string_view s) {
  for (auto p : {ChannelProfile::kNlosA, ChannelProfile::kNlosB, ChannelProfile::kNlosC,
                 ChannelProfile::kLosD, ChannelProfile::kLosE}) {
    if (s == to_string(p)) return p;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown channel profile '" + std::string(s) + "'");
}

NoiseType parse_noise_type(std::string_view s) {
  for (auto t : {NoiseType::kNone, NoiseType::kAwgn, NoiseType::kPhase, NoiseType::kBurst,
                 NoiseType::kPacketDrop}) {
    if (s == to_string(t)) return t;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown noise type '" + std::string(s) + "'");
}

void SystemConfig::validate() const {
  if (n_rx != 1) throw Error(ErrorCode::kInvalidConfig, "n_rx must be 1");
  if (n_tx < 1) throw Error(ErrorCode::kInvalidConfig, "n_tx must be >= 1");
  if (n_sc < 2) throw Error(ErrorCode::kInvalidConfig, "n_sc must be >= 2");
  if (pred_len < 1 || hist_len <= pred_len) {
    throw Error(ErrorCode::kInvalidConfig, "require hist_len > pred_len >= 1");
  }
  if (!(carrier_freq > 0) || !(sc_spacing > 0) || !(report_interval > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "frequencies and report interval must be positive");
  }
}

void ScenarioDescriptor::validate() const {
  if (!std::isfinite(velocity) || velocity < 0) {
    throw Error(ErrorCode::kInvalidScenario, "velocity must be finite and nonnegative");
  }
  if (!(delay_spread > 0) || !std::isfinite(delay_spread)) {
    throw Error(ErrorCode::kInvalidScenario, "delay spread must be positive");
  }
  if (noise_type == NoiseType::kPacketDrop) {
    if (!(noise_degree >= 0.0 && noise_degree <= 1.0)) {
      throw Error(ErrorCode::kInvalidScenario, "packet drop probability must lie in [0, 1]");
    }
  } else if (!std::isfinite(noise_degree)) {
    throw Error(ErrorCode::kInvalidScenario, "noise degree must be finite");
  }
}

std::string ScenarioDescriptor::id() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s_%s_v%g_ds%gns_%s_%g",
                duplex == Duplex::kFdd ? "fdd" : "tdd",
                std::string(to_string(channel_profile)).c_str(), velocity, delay_spread * 1e9,
                std::string(to_string(noise_type)).c_str(), noise_degree);
  return buf;
}

CsiSequence::CsiSequence(std::size_t n_tx, std::size_t len, std::size_t n_sc)
    : n_tx_(n_tx), len_(len), n_sc_(n_sc), data_(n_tx * len * n_sc), timestamps_(len, 0.0) {
  std::iota(timestamps_.begin(), timestamps_.end(), 0.0);
}

CsiSequence::CsiSequence(std::size_t n_tx, std::size_t len, std::size_t n_sc,
                         std::vector<cdouble> data, std::vector<double> timestamps)
    : n_tx_(n_tx), len_(len), n_sc_(n_sc), data_(std::move(data)),
      timestamps_(std::move(timestamps)) {
  if (data_.size() != n_tx * len * n_sc || timestamps_.size() != len) {
    throw Error(ErrorCode::kDimensionMismatch, "CsiSequence buffer does not match shape");
  }
}

void CsiSequence::set_uniform_timestamps(double t0, double dt) {
  for (std::size_t i = 0; i < len_; ++i) timestamps_[i] = t0 + static_cast<double>(i) * dt;
}

CsiSequence CsiSequence::time_slice(std::size_t begin, std::size_t count) const {
  if (begin + count > len_) throw Error(ErrorCode::kDimensionMismatch, "time slice out of range");
  CsiSequence out(n_tx_, count, n_sc_);
  for (std::size_t m = 0; m < n_tx_; ++m)
    for (std::size_t t = 0; t < count; ++t)
      for (std::size_t k = 0; k < n_sc_; ++k) out.at(m, t, k) = at(m, begin + t, k);
  for (std::size_t t = 0; t < count; ++t) out.timestamps_[t] = timestamps_[begin + t];
  return out;
}

CsiSequence CsiSequence::subcarrier_slice(std::size_t begin, std::size_t count) const {
  if (begin + count > n_sc_) {
    throw Error(ErrorCode::kDimensionMismatch, "subcarrier slice out of range");
  }
  CsiSequence out(n_tx_, len_, count);
  for (std::size_t m = 0; m < n_tx_; ++m)
    for (std::size_t t = 0; t < len_; ++t)
      for (std::size_t k = 0; k < count; ++k) out.at(m, t, k) = at(m, t, begin + k);
  out.timestamps_ = timestamps_;
  return out;
}

std::optional<Error> validate_shapes(const CsiSequence& seq, const SystemConfig& config,
                                     std::size_t expected_len) {
  if (seq.n_tx() != config.n_tx || seq.len() != expected_len || seq.n_sc() != config.n_sc) {
    return Error(ErrorCode::kDimensionMismatch,
                 "expected (" + std::to_string(config.n_tx) + ", " + std::to_string(expected_len) +
                     ", " + std::to_string(config.n_sc) + "), got (" +
                     std::to_string(seq.n_tx()) + ", " + std::to_string(seq.len()) + ", " +
                     std::to_string(seq.n_sc()) + ")");
  }
  if (seq.data().size() != seq.n_tx() * seq.len() * seq.n_sc()) {
    return Error(ErrorCode::kDimensionMismatch, "buffer size does not match shape");
  }
  for (const auto& v : seq.data()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      return Error(ErrorCode::kNonFiniteValue, "sequence contains NaN or Inf");
    }
  }
  return std::nullopt;
}

void require_shapes(const CsiSequence& seq, const SystemConfig& config, std::size_t expected_len) {
  if (auto err = validate_shapes(seq, config, expected_len)) throw *err;
}

double frobenius_norm_sq(const CsiSequence& seq) {
  double acc = 0.0;
  for (const auto& v : seq.data()) acc += std::norm(v);
  return acc;
}

}  // namespace csi4cast
