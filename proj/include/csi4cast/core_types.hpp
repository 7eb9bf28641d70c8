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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csi4cast/error.hpp"

namespace csi4cast {

using cdouble = std::complex<double>;

enum class Duplex : std::uint8_t { kTdd = 0, kFdd = 1 };

enum class ChannelProfile : std::uint8_t {
  kNlosA = 0,
  kNlosB = 1,
  kNlosC = 2,
  kLosD = 3,
  kLosE = 4,
};

enum class NoiseType : std::uint8_t {
  kNone = 0,
  kAwgn = 1,
  kPhase = 2,
  kBurst = 3,
  kPacketDrop = 4,
};

std::string_view to_string(Duplex d);
std::string_view to_string(ChannelProfile p);
std::string_view to_string(NoiseType t);
Duplex parse_duplex(std::string_view s);
ChannelProfile parse_profile(std::string_view s);
NoiseType parse_noise_type(std::string_view s);

inline bool is_los(ChannelProfile p) {
  return p == ChannelProfile::kLosD || p == ChannelProfile::kLosE;
}

/// Antenna, band and window dimensions shared by every module.
///
/// The receive-antenna axis is always 1 and is squeezed out of all tensors.
struct SystemConfig {
  std::size_t n_tx = 4;
  std::size_t n_rx = 1;
  std::size_t n_sc = 32;
  std::size_t n_guard = 8;
  std::size_t hist_len = 16;
  std::size_t pred_len = 4;
  double carrier_freq = 2.4e9;
  double sc_spacing = 30e3;
  double report_interval = 2.5e-3;
  Duplex duplex = Duplex::kTdd;

  /// Subcarriers on the simulated grid: both bands plus guard for FDD.
  std::size_t total_subcarriers() const {
    return duplex == Duplex::kFdd ? 2 * n_sc + n_guard : n_sc;
  }

  /// Throws kInvalidConfig when an invariant is violated.
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

/// One element of the scenario grid.
struct ScenarioDescriptor {
  double velocity = 1.0;        // m/s
  double delay_spread = 30e-9;  // seconds
  ChannelProfile channel_profile = ChannelProfile::kNlosA;
  NoiseType noise_type = NoiseType::kNone;
  /// dB for SNR-controlled noise, drop probability for kPacketDrop.
  double noise_degree = 0.0;
  Duplex duplex = Duplex::kTdd;

  void validate() const;
  /// Short stable identifier, e.g. "tdd_NLOS-A_v10_ds30ns_AWGN_20".
  std::string id() const;

  bool operator==(const ScenarioDescriptor&) const = default;
};

/// Complex tensor over (antenna, time, subcarrier), row-major.
class CsiSequence {
 public:
  CsiSequence() = default;
  CsiSequence(std::size_t n_tx, std::size_t len, std::size_t n_sc);
  CsiSequence(std::size_t n_tx, std::size_t len, std::size_t n_sc, std::vector<cdouble> data,
              std::vector<double> timestamps);

  std::size_t n_tx() const { return n_tx_; }
  std::size_t len() const { return len_; }
  std::size_t n_sc() const { return n_sc_; }
  std::size_t numel() const { return data_.size(); }

  cdouble& at(std::size_t m, std::size_t t, std::size_t k) {
    return data_[(m * len_ + t) * n_sc_ + k];
  }
  const cdouble& at(std::size_t m, std::size_t t, std::size_t k) const {
    return data_[(m * len_ + t) * n_sc_ + k];
  }

  std::vector<cdouble>& data() { return data_; }
  const std::vector<cdouble>& data() const { return data_; }
  std::vector<double>& timestamps() { return timestamps_; }
  const std::vector<double>& timestamps() const { return timestamps_; }

  /// Uniform timestamps t0 + i * dt.
  void set_uniform_timestamps(double t0, double dt);

  /// Time steps [begin, begin + count) for all antennas and subcarriers.
  CsiSequence time_slice(std::size_t begin, std::size_t count) const;
  /// Subcarriers [begin, begin + count).
  CsiSequence subcarrier_slice(std::size_t begin, std::size_t count) const;

  bool operator==(const CsiSequence&) const = default;

 private:
  std::size_t n_tx_ = 0;
  std::size_t len_ = 0;
  std::size_t n_sc_ = 0;
  std::vector<cdouble> data_;
  std::vector<double> timestamps_;
};

struct CsiSample {
  CsiSequence history;  // noisy input window
  CsiSequence target;   // clean future window
  ScenarioDescriptor scenario;
  std::uint64_t seed = 0;

  bool operator==(const CsiSample&) const = default;
};

struct CsiDataset {
  SystemConfig config;
  std::vector<CsiSample> samples;

  bool operator==(const CsiDataset&) const = default;
};

/// Ok when `seq` has shape (config.n_tx, expected_len, config.n_sc) and only finite entries.
std::optional<Error> validate_shapes(const CsiSequence& seq, const SystemConfig& config,
                                     std::size_t expected_len);

/// Throwing form of validate_shapes.
void require_shapes(const CsiSequence& seq, const SystemConfig& config, std::size_t expected_len);

double frobenius_norm_sq(const CsiSequence& seq);

}  // namespace csi4cast
