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

// Parameterized building blocks. Each layer registers its tensors in a
// ParameterSet under a dotted name prefix and applies itself to a Graph.

#include <string>
#include <vector>

#include "csi4cast/nn/graph.hpp"
#include "csi4cast/rng.hpp"

namespace csi4cast::nn {

/// Fills `p` with U(-sqrt(3 / fan_in), sqrt(3 / fan_in)).
void init_fan_in_uniform(Parameter& p, std::size_t fan_in, Engine& rng);

struct Linear {
  Parameter* weight = nullptr;  // [out, in]
  Parameter* bias = nullptr;    // [out] or null
  std::size_t in = 0, out = 0;

  Linear() = default;
  Linear(ParameterSet& ps, const std::string& name, std::size_t in_features,
         std::size_t out_features, Engine& rng, bool with_bias = true);
  Var operator()(Graph& g, Var x) const;
};

struct Conv2d {
  Parameter* weight = nullptr;  // [out, in/groups, kh, kw]
  Parameter* bias = nullptr;
  std::size_t groups = 1;

  Conv2d() = default;
  Conv2d(ParameterSet& ps, const std::string& name, std::size_t in_channels,
         std::size_t out_channels, std::size_t kernel_h, std::size_t kernel_w, std::size_t groups,
         Engine& rng, bool with_bias = true);
  Var operator()(Graph& g, Var x) const;
};

struct BatchNorm2d {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  Parameter* running_mean = nullptr;  // buffer
  Parameter* running_var = nullptr;   // buffer

  BatchNorm2d() = default;
  BatchNorm2d(ParameterSet& ps, const std::string& name, std::size_t channels);
  Var operator()(Graph& g, Var x) const;
};

struct LayerNorm {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;

  LayerNorm() = default;
  LayerNorm(ParameterSet& ps, const std::string& name, std::size_t features);
  Var operator()(Graph& g, Var x) const;
};

/// Dense stack dims[0] -> dims[1] -> ... with `hidden` between layers and
/// `output` after the last one.
struct Mlp {
  std::vector<Linear> layers;
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kNone;

  Mlp() = default;
  Mlp(ParameterSet& ps, const std::string& name, const std::vector<std::size_t>& dims,
      Activation hidden_act, Activation output_act, Engine& rng);
  Var operator()(Graph& g, Var x) const;
};

/// Full (non-causal) multi-head self-attention over x[B, T, D].
struct MultiHeadAttention {
  Linear q, k, v, o;
  std::size_t heads = 1;
  std::size_t dim = 0;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet& ps, const std::string& name, std::size_t model_dim,
                     std::size_t n_heads, Engine& rng);
  Var operator()(Graph& g, Var x) const;
};

/// Post-norm encoder layer: LN(x + MHA(x)), then LN(x + FFN(x)).
struct EncoderLayer {
  MultiHeadAttention attn;
  LayerNorm norm1, norm2;
  Linear ff1, ff2;
  Activation activation = Activation::kRelu;
  double dropout = 0.0;

  EncoderLayer() = default;
  EncoderLayer(ParameterSet& ps, const std::string& name, std::size_t model_dim,
               std::size_t n_heads, std::size_t ffn_dim, Activation act, double dropout_p,
               Engine& rng);
  Var operator()(Graph& g, Var x) const;
};

/// Gated recurrent stack over x[B, T, F]; returns the last layer's final hidden state [B, H].
struct Gru {
  struct Cell {
    Linear input;   // F -> 3H, gate order (reset, update, candidate)
    Linear hidden;  // H -> 3H
  };
  std::vector<Cell> cells;
  std::size_t hidden_dim = 0;

  Gru() = default;
  Gru(ParameterSet& ps, const std::string& name, std::size_t input_dim, std::size_t hidden,
      std::size_t layers, Engine& rng);
  Var operator()(Graph& g, Var x) const;
};

}  // namespace csi4cast::nn
