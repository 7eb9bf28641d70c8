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

#include "csi4cast/nn/layers.hpp"

#include <cmath>

#include "csi4cast/error.hpp"

namespace csi4cast::nn {

void init_fan_in_uniform(Parameter& p, std::size_t fan_in, Engine& rng) {
  const double bound = std::sqrt(3.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (auto& v : p.value.data) v = (2.0 * uniform01(rng) - 1.0) * bound;
}

Linear::Linear(ParameterSet& ps, const std::string& name, std::size_t in_features,
               std::size_t out_features, Engine& rng, bool with_bias)
    : in(in_features), out(out_features) {
  if (in == 0 || out == 0) throw Error(ErrorCode::kConfigError, name + ": zero-sized linear layer");
  weight = &ps.add(name + ".weight", {out, in});
  init_fan_in_uniform(*weight, in, rng);
  if (with_bias) bias = &ps.add(name + ".bias", {out});
}

Var Linear::operator()(Graph& g, Var x) const {
  return linear(x, g.param(*weight), bias ? g.param(*bias) : Var{});
}

Conv2d::Conv2d(ParameterSet& ps, const std::string& name, std::size_t in_channels,
               std::size_t out_channels, std::size_t kernel_h, std::size_t kernel_w,
               std::size_t n_groups, Engine& rng, bool with_bias)
    : groups(n_groups) {
  if (groups == 0 || in_channels % groups || out_channels % groups) {
    throw Error(ErrorCode::kConfigError, name + ": channels not divisible by groups");
  }
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw Error(ErrorCode::kConfigError, name + ": same padding needs odd kernel sizes");
  }
  const std::size_t in_per_group = in_channels / groups;
  weight = &ps.add(name + ".weight", {out_channels, in_per_group, kernel_h, kernel_w});
  init_fan_in_uniform(*weight, in_per_group * kernel_h * kernel_w, rng);
  if (with_bias) bias = &ps.add(name + ".bias", {out_channels});
}

Var Conv2d::operator()(Graph& g, Var x) const {
  return conv2d(x, g.param(*weight), bias ? g.param(*bias) : Var{}, groups);
}

BatchNorm2d::BatchNorm2d(ParameterSet& ps, const std::string& name, std::size_t channels) {
  gamma = &ps.add(name + ".gamma", {channels});
  beta = &ps.add(name + ".beta", {channels});
  running_mean = &ps.add(name + ".running_mean", {channels}, true);
  running_var = &ps.add(name + ".running_var", {channels}, true);
  std::fill(gamma->value.data.begin(), gamma->value.data.end(), 1.0);
  std::fill(running_var->value.data.begin(), running_var->value.data.end(), 1.0);
}

Var BatchNorm2d::operator()(Graph& g, Var x) const {
  return batchnorm2d(x, g.param(*gamma), g.param(*beta), *running_mean, *running_var);
}

LayerNorm::LayerNorm(ParameterSet& ps, const std::string& name, std::size_t features) {
  gamma = &ps.add(name + ".gamma", {features});
  beta = &ps.add(name + ".beta", {features});
  std::fill(gamma->value.data.begin(), gamma->value.data.end(), 1.0);
}

Var LayerNorm::operator()(Graph& g, Var x) const {
  return layernorm(x, g.param(*gamma), g.param(*beta));
}

Mlp::Mlp(ParameterSet& ps, const std::string& name, const std::vector<std::size_t>& dims,
         Activation hidden_act, Activation output_act, Engine& rng)
    : hidden(hidden_act), output(output_act) {
  if (dims.size() < 2) throw Error(ErrorCode::kConfigError, name + ": MLP needs two dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(ps, name + "." + std::to_string(i), dims[i], dims[i + 1], rng);
  }
}

Var Mlp::operator()(Graph& g, Var x) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](g, x);
    x = activate(x, i + 1 < layers.size() ? hidden : output);
  }
  return x;
}

MultiHeadAttention::MultiHeadAttention(ParameterSet& ps, const std::string& name,
                                       std::size_t model_dim, std::size_t n_heads, Engine& rng)
    : q(ps, name + ".q", model_dim, model_dim, rng),
      // A key bias shifts every score of a query equally and cancels in softmax.
      k(ps, name + ".k", model_dim, model_dim, rng, false),
      v(ps, name + ".v", model_dim, model_dim, rng),
      o(ps, name + ".o", model_dim, model_dim, rng),
      heads(n_heads),
      dim(model_dim) {
  if (heads == 0 || model_dim % heads != 0) {
    throw Error(ErrorCode::kConfigError, name + ": heads must divide the model dimension");
  }
}

Var MultiHeadAttention::operator()(Graph& g, Var x) const {
  const std::size_t B = x.shape()[0], T = x.shape()[1];
  const std::size_t dh = dim / heads;
  auto split = [&](Var t) {
    t = reshape(t, {B, T, heads, dh});
    t = permute(t, {0, 2, 1, 3});
    return reshape(t, {B * heads, T, dh});
  };
  Var qh = split(q(g, x));
  Var kh = split(k(g, x));
  Var vh = split(v(g, x));
  Var scores = scale(bmm(qh, kh, true), 1.0 / std::sqrt(static_cast<double>(dh)));
  Var ctx = bmm(softmax_last(scores), vh);
  ctx = permute(reshape(ctx, {B, heads, T, dh}), {0, 2, 1, 3});
  return o(g, reshape(ctx, {B, T, dim}));
}

EncoderLayer::EncoderLayer(ParameterSet& ps, const std::string& name, std::size_t model_dim,
                           std::size_t n_heads, std::size_t ffn_dim, Activation act,
                           double dropout_p, Engine& rng)
    : attn(ps, name + ".attn", model_dim, n_heads, rng),
      norm1(ps, name + ".norm1", model_dim),
      norm2(ps, name + ".norm2", model_dim),
      ff1(ps, name + ".ff1", model_dim, ffn_dim, rng),
      ff2(ps, name + ".ff2", ffn_dim, model_dim, rng),
      activation(act),
      dropout(dropout_p) {}

Var EncoderLayer::operator()(Graph& g, Var x) const {
  x = norm1(g, add(x, nn::dropout(attn(g, x), dropout)));
  Var f = ff2(g, nn::dropout(activate(ff1(g, x), activation), dropout));
  return norm2(g, add(x, nn::dropout(f, dropout)));
}

Gru::Gru(ParameterSet& ps, const std::string& name, std::size_t input_dim, std::size_t hidden,
         std::size_t layers, Engine& rng)
    : hidden_dim(hidden) {
  if (layers == 0 || hidden == 0) throw Error(ErrorCode::kConfigError, name + ": empty GRU");
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string prefix = name + "." + std::to_string(l);
    cells.push_back({Linear(ps, prefix + ".input", l == 0 ? input_dim : hidden, 3 * hidden, rng),
                     Linear(ps, prefix + ".hidden", hidden, 3 * hidden, rng)});
  }
}

Var Gru::operator()(Graph& g, Var x) const {
  const std::size_t B = x.shape()[0], T = x.shape()[1];
  const std::size_t H = hidden_dim;
  std::vector<Var> seq;
  for (std::size_t t = 0; t < T; ++t) seq.push_back(select_axis1(x, t));
  for (const auto& cell : cells) {
    Var h = g.input(Tensor({B, H}));
    std::vector<Var> outputs;
    for (const Var& xt : seq) {
      Var gx = cell.input(g, xt);
      Var gh = cell.hidden(g, h);
      Var r = sigmoid(add(slice_last(gx, 0, H), slice_last(gh, 0, H)));
      Var z = sigmoid(add(slice_last(gx, H, H), slice_last(gh, H, H)));
      Var n = tanh(add(slice_last(gx, 2 * H, H), mul(r, slice_last(gh, 2 * H, H))));
      h = add(n, mul(z, sub(h, n)));
      outputs.push_back(h);
    }
    seq = std::move(outputs);
  }
  return seq.back();
}

}  // namespace csi4cast::nn
