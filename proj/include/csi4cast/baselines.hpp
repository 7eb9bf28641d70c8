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

#include <vector>

#include "csi4cast/nn/layers.hpp"
#include "csi4cast/predictor.hpp"

namespace csi4cast {

/// Repeats the last history snapshot over the horizon.
CsiSequence np_predict(const CsiSequence& history, std::size_t pred_len);

class NpBaseline final : public Predictor {
 public:
  explicit NpBaseline(const SystemConfig& system);

  ModelKind kind() const override { return ModelKind::kNp; }
  const SystemConfig& system() const override { return system_; }
  nn::ParameterSet& parameters() override { return params_; }
  const nn::ParameterSet& parameters() const override { return params_; }
  nn::Var forward(nn::Graph& g, nn::Var x) const override;
  std::vector<std::pair<std::string, std::string>> describe() const override { return {}; }

 private:
  SystemConfig system_;
  nn::ParameterSet params_;
};

struct RnnConfig {
  std::size_t hidden = 64;
  std::size_t layers = 1;

  bool operator==(const RnnConfig&) const = default;
};

/// Per antenna: each step's (Re || Im) subcarrier vector feeds a GRU stack;
/// a linear head maps the final hidden state to |P| * 2N outputs.
class RnnBaseline final : public Predictor {
 public:
  RnnBaseline(const RnnConfig& config, const SystemConfig& system, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kRnn; }
  const SystemConfig& system() const override { return system_; }
  nn::ParameterSet& parameters() override { return params_; }
  const nn::ParameterSet& parameters() const override { return params_; }
  nn::Var forward(nn::Graph& g, nn::Var x) const override;
  std::vector<std::pair<std::string, std::string>> describe() const override;

  const RnnConfig& config() const { return config_; }
  const nn::Gru& gru() const { return gru_; }
  const nn::Linear& head() const { return head_; }

 private:
  RnnConfig config_;
  SystemConfig system_;
  nn::ParameterSet params_;
  nn::Gru gru_;
  nn::Linear head_;
};

struct CnnConfig {
  std::vector<std::size_t> filters{16, 16};
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;

  bool operator==(const CnnConfig&) const = default;
};

/// Per antenna: same-padding ReLU convolutions over (time, subcarrier) on the
/// two-channel real stack, a 1x1 head back to 2 channels, then a linear map
/// of the time axis |T| -> |P|.
class CnnBaseline final : public Predictor {
 public:
  CnnBaseline(const CnnConfig& config, const SystemConfig& system, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kCnn; }
  const SystemConfig& system() const override { return system_; }
  nn::ParameterSet& parameters() override { return params_; }
  const nn::ParameterSet& parameters() const override { return params_; }
  nn::Var forward(nn::Graph& g, nn::Var x) const override;
  std::vector<std::pair<std::string, std::string>> describe() const override;

  const CnnConfig& config() const { return config_; }
  const std::vector<nn::Conv2d>& convs() const { return convs_; }
  const nn::Conv2d& head() const { return head_; }
  const nn::Linear& time_map() const { return time_map_; }

 private:
  CnnConfig config_;
  SystemConfig system_;
  nn::ParameterSet params_;
  std::vector<nn::Conv2d> convs_;
  nn::Conv2d head_;
  nn::Linear time_map_;
};

std::vector<std::pair<std::string, std::string>> describe(const RnnConfig& c);
std::vector<std::pair<std::string, std::string>> describe(const CnnConfig& c);
void apply_rnn_key(RnnConfig& c, const std::string& key, const std::string& value);
void apply_cnn_key(CnnConfig& c, const std::string& key, const std::string& value);

}  // namespace csi4cast
