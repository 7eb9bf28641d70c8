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

#include "csi4cast/baselines.hpp"

#include "csi4cast/keyvalue.hpp"

namespace csi4cast {

using nn::Graph;
using nn::Var;

namespace {
void check_input(Var x, const SystemConfig& sys) {
  const auto& s = x.shape();
  if (s.size() != 4 || s[1] != 2 || s[2] != sys.hist_len || s[3] != sys.n_sc) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input " + nn::shape_string(s) + " does not match the system config");
  }
}
}  // namespace

CsiSequence np_predict(const CsiSequence& history, std::size_t pred_len) {
  if (history.len() == 0) throw Error(ErrorCode::kEmptyHistory, "history has no snapshots");
  CsiSequence out(history.n_tx(), pred_len, history.n_sc());
  const std::size_t last = history.len() - 1;
  for (std::size_t m = 0; m < history.n_tx(); ++m)
    for (std::size_t t = 0; t < pred_len; ++t)
      for (std::size_t k = 0; k < history.n_sc(); ++k) out.at(m, t, k) = history.at(m, last, k);
  const auto& ts = history.timestamps();
  const double dt = ts.size() > 1 ? ts[1] - ts[0] : 1.0;
  out.set_uniform_timestamps(ts.empty() ? 0.0 : ts.back() + dt, dt);
  return out;
}

NpBaseline::NpBaseline(const SystemConfig& system) : system_(system) { system_.validate(); }

Var NpBaseline::forward(Graph&, Var x) const {
  check_input(x, system_);
  return nn::take_axis2(x, std::vector<std::size_t>(system_.pred_len, system_.hist_len - 1));
}

RnnBaseline::RnnBaseline(const RnnConfig& config, const SystemConfig& system, std::uint64_t seed)
    : config_(config), system_(system) {
  system_.validate();
  Engine rng = make_engine(seed, stream::kInit);
  gru_ = nn::Gru(params_, "gru", 2 * system_.n_sc, config_.hidden, config_.layers, rng);
  head_ = nn::Linear(params_, "head", config_.hidden, system_.pred_len * 2 * system_.n_sc, rng);
}

Var RnnBaseline::forward(Graph& g, Var x) const {
  check_input(x, system_);
  const std::size_t B = x.shape()[0], T = system_.hist_len, N = system_.n_sc;
  const std::size_t P = system_.pred_len;
  Var steps = nn::reshape(nn::permute(x, {0, 2, 1, 3}), {B, T, 2 * N});
  Var y = head_(g, gru_(g, steps));  // [B, P * 2N]
  return nn::permute(nn::reshape(y, {B, P, 2, N}), {0, 2, 1, 3});
}

CnnBaseline::CnnBaseline(const CnnConfig& config, const SystemConfig& system, std::uint64_t seed)
    : config_(config), system_(system) {
  system_.validate();
  if (config_.filters.empty()) throw Error(ErrorCode::kConfigError, "CNN baseline needs filters");
  Engine rng = make_engine(seed, stream::kInit);
  std::size_t in = 2;
  for (std::size_t i = 0; i < config_.filters.size(); ++i) {
    convs_.emplace_back(params_, "conv." + std::to_string(i), in, config_.filters[i],
                        config_.kernel_h, config_.kernel_w, 1, rng);
    in = config_.filters[i];
  }
  head_ = nn::Conv2d(params_, "head", in, 2, 1, 1, 1, rng);
  time_map_ = nn::Linear(params_, "time_map", system_.hist_len, system_.pred_len, rng);
}

Var CnnBaseline::forward(Graph& g, Var x) const {
  check_input(x, system_);
  Var y = x;
  for (const auto& c : convs_) y = nn::relu(c(g, y));
  y = head_(g, y);                                     // [B, 2, T, N]
  y = time_map_(g, nn::permute(y, {0, 1, 3, 2}));      // [B, 2, N, P]
  return nn::permute(y, {0, 1, 3, 2});
}

std::vector<std::pair<std::string, std::string>> describe(const RnnConfig& c) {
  return {{"rnn.hidden", std::to_string(c.hidden)}, {"rnn.layers", std::to_string(c.layers)}};
}

std::vector<std::pair<std::string, std::string>> describe(const CnnConfig& c) {
  return {{"cnn.filters", kv::format_size_list(c.filters)},
          {"cnn.kernel_h", std::to_string(c.kernel_h)},
          {"cnn.kernel_w", std::to_string(c.kernel_w)}};
}

void apply_rnn_key(RnnConfig& c, const std::string& key, const std::string& value) {
  if (key == "rnn.hidden") c.hidden = kv::parse_size(key, value);
  else if (key == "rnn.layers") c.layers = kv::parse_size(key, value);
  else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
}

void apply_cnn_key(CnnConfig& c, const std::string& key, const std::string& value) {
  if (key == "cnn.filters") c.filters = kv::parse_size_list(key, value);
  else if (key == "cnn.kernel_h") c.kernel_h = kv::parse_size(key, value);
  else if (key == "cnn.kernel_w") c.kernel_w = kv::parse_size(key, value);
  else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
}

std::vector<std::pair<std::string, std::string>> RnnBaseline::describe() const {
  return csi4cast::describe(config_);
}

std::vector<std::pair<std::string, std::string>> CnnBaseline::describe() const {
  return csi4cast::describe(config_);
}

}  // namespace csi4cast
