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

#include <memory>
#include <string>
#include <vector>

#include "csi4cast/core_types.hpp"
#include "csi4cast/nn/graph.hpp"

namespace csi4cast {

enum class ModelKind : std::uint8_t { kCsi4Cast = 0, kRnn = 1, kCnn = 2, kNp = 3 };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

/// Complex (T, N) matrix to a real [2, T, N] tensor: channel 0 real, channel 1 imaginary.
nn::Tensor real_stack(const std::vector<cdouble>& x, std::size_t rows, std::size_t cols);
std::vector<cdouble> complex_restack(const nn::Tensor& x);

/// Histories of several samples as one batch [S * n_tx, 2, T, N], antenna-major within a sample.
nn::Tensor stack_sequences(const std::vector<const CsiSequence*>& seqs);
/// Inverse of stack_sequences for predictions [S * n_tx, 2, P, N].
std::vector<CsiSequence> unstack_sequences(const nn::Tensor& x, std::size_t n_tx);

/// Common interface of CSI-4CAST and the baselines. Every predictor maps a
/// batch of real-stacked per-antenna histories [B, 2, |T|, N] to
/// predictions [B, 2, |P|, N] with one shared parameter set.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual ModelKind kind() const = 0;
  virtual const SystemConfig& system() const = 0;
  virtual nn::ParameterSet& parameters() = 0;
  virtual const nn::ParameterSet& parameters() const = 0;
  virtual nn::Var forward(nn::Graph& g, nn::Var x) const = 0;
  /// Flat key=value description of the architecture, stored in checkpoints.
  virtual std::vector<std::pair<std::string, std::string>> describe() const = 0;

  /// Eval-mode prediction of the clean future for each history.
  std::vector<CsiSequence> predict(const std::vector<const CsiSequence*>& histories) const;
  CsiSequence predict(const CsiSequence& history) const;
};

}  // namespace csi4cast
