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
#include <optional>
#include <vector>

#include "csi4cast/nn/layers.hpp"
#include "csi4cast/predictor.hpp"

namespace csi4cast {

enum class CombineOp : std::uint8_t { kAdd = 0, kMultiply = 1 };

std::string_view to_string(CombineOp op);
CombineOp parse_combine_op(std::string_view s);

struct AclConfig {
  std::size_t layers = 2;  // dense layers in the MLP
  std::size_t hidden = 32;
  nn::Activation activation = nn::Activation::kRelu;
  nn::Activation output = nn::Activation::kNone;
  CombineOp combine = CombineOp::kAdd;

  bool operator==(const AclConfig&) const = default;
};

struct Csi4CastConfig {
  std::size_t cnn_depth = 2;  // nu
  /// Explicit channel schedule; empty selects [2, 4, .., 2^nu, .., 4, 2].
  std::vector<std::size_t> cnn_channels;
  std::size_t cnn_kernel_h = 3;
  std::size_t cnn_kernel_w = 3;
  bool cnn_residual = true;
  nn::Activation cnn_activation = nn::Activation::kRelu;

  AclConfig acl_time;
  AclConfig acl_subcarrier;  // used for FDD only

  std::size_t shuffle_maps = 16;   // rho
  std::size_t shuffle_groups = 4;  // eta
  std::size_t shuffle_kernel = 3;  // mu
  std::size_t shuffle_blocks = 2;
  double shuffle_dropout = 0.1;

  std::size_t latent = 64;  // gamma
  std::size_t encoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ffn_hidden = 128;
  double dropout = 0.1;
  nn::Activation ffn_activation = nn::Activation::kRelu;
  /// Divide each antenna's history by its RMS and multiply the prediction back.
  bool input_scaling = true;

  /// Resolved channel schedule.
  std::vector<std::size_t> channel_schedule() const;
  /// Throws kConfigError when an invariant is violated.
  void validate() const;

  bool operator==(const Csi4CastConfig&) const = default;
};

// Blocks of the forward pass. Every block works on a batch axis B in front of
// the per-antenna shapes; B = samples * n_tx.

struct CnnBlock {
  std::vector<nn::Conv2d> convs;
  std::vector<nn::BatchNorm2d> norms;  // one per conv except the last
  nn::Activation activation = nn::Activation::kRelu;
  bool residual = true;
};

struct AclBlock {
  nn::Mlp time;                   // |T| -> |T|, shared over columns
  std::optional<nn::Mlp> subcarrier;  // 2N -> 2N, shared over rows
  CombineOp combine = CombineOp::kAdd;
  CombineOp subcarrier_combine = CombineOp::kAdd;
};

struct ShuffleBlock {
  nn::Conv2d pw1, dw, pw2;
  nn::Linear se1, se2;
  std::size_t groups = 1;
  double dropout = 0.0;
};

struct ShuffleStage {
  nn::Conv2d project_in, project_out;
  std::vector<ShuffleBlock> blocks;
};

/// [B, 2, T, N] -> [B, 2, T, N].
nn::Var cnn_residual(nn::Graph& g, nn::Var x, const CnnBlock& block);
/// [B, 2, T, N] -> [B, T, 2N], columns [0, N) real and [N, 2N) imaginary.
nn::Var to_frequency_matrix(nn::Var x);
/// [B, T, 2N] -> [B, 2, T, N].
nn::Var from_frequency_matrix(nn::Var x);

/// Weight W for nn::linear such that a (Re || Im) row times W^T equals the
/// complex row times `c` (N x N, row-major).
nn::Tensor complex_right_multiply_weight(const std::vector<cdouble>& c, std::size_t n);
/// Unitary DFT matrix F[k, n] = exp(-j 2 pi k n / N) / sqrt(N).
std::vector<cdouble> unitary_dft_matrix(std::size_t n);

/// Rows of x[..., 2N] right-multiplied by F^H (delay domain) or F (back).
nn::Var idft_delay_transform(nn::Graph& g, nn::Var x_f);
nn::Var dft_transform(nn::Graph& g, nn::Var x_d);
nn::Tensor idft_delay_transform(const nn::Tensor& x_f);
nn::Tensor dft_transform(const nn::Tensor& x_d);

/// [B, T, 2N] -> [B, T, 2N]. `apply_subcarrier` needs the FDD stage.
nn::Var acl_forward(nn::Graph& g, nn::Var x, const AclBlock& block, bool apply_subcarrier);

/// Channel order after reshaping C channels to (groups, C / groups) and transposing.
std::vector<std::size_t> channel_shuffle_order(std::size_t channels, std::size_t groups);
/// x[B, C, H, W] with channels permuted by channel_shuffle_order.
nn::Var channel_shuffle(nn::Var x, std::size_t groups);

/// [B, rho, T, N] -> [B, rho, T, N].
nn::Var shuffle_block_forward(nn::Graph& g, nn::Var x, const ShuffleBlock& block);
/// [B, T, 2N] -> [B, T, 2N].
nn::Var shuffle_stage(nn::Graph& g, nn::Var x, const ShuffleStage& stage);

/// PE[v, u] = sin(v / T^(u / gamma)) for even u, cos(v / T^((u - 1) / gamma)) for odd u.
nn::Tensor position_embedding(std::size_t hist_len, std::size_t latent);

/// Adds `pe` to x_te[B, T, gamma] and runs the encoder stack.
nn::Var transformer_encode(nn::Graph& g, nn::Var x_te, const nn::Tensor& pe,
                           const std::vector<nn::EncoderLayer>& layers);

/// x_tf[B, T, gamma] -> [B, 2, P, N]: mlp_a per step (gamma -> 2N), then
/// mlp_b per column (T -> P).
nn::Var prediction_head(nn::Graph& g, nn::Var x_tf, const nn::Linear& mlp_a,
                        const nn::Linear& mlp_b);

class Csi4CastModel final : public Predictor {
 public:
  Csi4CastModel(const Csi4CastConfig& config, const SystemConfig& system, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kCsi4Cast; }
  const SystemConfig& system() const override { return system_; }
  nn::ParameterSet& parameters() override { return params_; }
  const nn::ParameterSet& parameters() const override { return params_; }
  nn::Var forward(nn::Graph& g, nn::Var x) const override;
  std::vector<std::pair<std::string, std::string>> describe() const override;

  const Csi4CastConfig& config() const { return config_; }
  const CnnBlock& cnn() const { return cnn_; }
  const AclBlock& acl(bool delay_branch) const { return delay_branch ? acl_d_ : acl_f_; }
  const ShuffleStage& shuffle(bool delay_branch) const { return delay_branch ? sh_d_ : sh_f_; }

 private:
  Csi4CastConfig config_;
  SystemConfig system_;
  nn::ParameterSet params_;
  CnnBlock cnn_;
  AclBlock acl_f_, acl_d_;
  ShuffleStage sh_f_, sh_d_;
  nn::Linear token_;
  nn::Tensor pe_;
  std::vector<nn::EncoderLayer> encoder_;
  nn::Linear head_a_, head_b_;
};

/// Config entries of describe() and their parser; keys are prefixed "model.".
std::vector<std::pair<std::string, std::string>> describe(const Csi4CastConfig& c);
void apply_model_key(Csi4CastConfig& c, const std::string& key, const std::string& value);

}  // namespace csi4cast
