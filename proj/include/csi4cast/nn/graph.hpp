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

// Tape-based reverse-mode differentiation over nn::Tensor.
//
// A Graph records every operation of one forward pass. Calling backward() on
// a scalar result walks the tape in reverse and accumulates gradients into
// the Parameter objects that entered the graph through Graph::param().
// Each op also adds its forward FLOP count to Graph::flops(); the counting
// convention is listed in docs/flops.md.

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csi4cast/nn/tensor.hpp"
#include "csi4cast/rng.hpp"

namespace csi4cast::nn {

class Graph;

struct Var {
  Graph* g = nullptr;
  int id = -1;

  bool valid() const { return g != nullptr && id >= 0; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  std::size_t numel() const { return value().numel(); }
};

class Graph {
 public:
  explicit Graph(bool training = false, std::uint64_t dropout_seed = 0);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Constant leaf; no gradient flows into it.
  Var input(Tensor t);
  /// Trainable leaf bound to `p`; repeated calls return the same node.
  Var param(Parameter& p);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient buffer of node `id`, allocated as zeros on first access.
  std::vector<double>& grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  bool has_grad(int id) const { return !nodes_[id].grad.empty(); }

  /// Seeds d(loss)/d(loss) = 1 and runs the tape backwards.
  void backward(Var loss);

  bool training() const { return training_; }
  Engine& rng() { return rng_; }
  double flops() const { return flops_; }
  void add_flops(double f) { flops_ += f; }

  using Backward = std::function<void(const Tensor& y, const std::vector<double>& dy)>;
  /// Appends an op node. `back` receives the node's value and gradient during backward.
  Var make(Tensor value, bool needs_grad, Backward back);

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    bool needs_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
  std::unordered_map<Parameter*, int> param_nodes_;
  bool training_;
  Engine rng_;
  double flops_ = 0.0;
};

enum class Activation { kNone, kRelu, kTanh, kSigmoid, kGelu };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

// Elementwise, same shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
/// a + b where b's shape equals a trailing suffix of a's shape.
Var add_suffix(Var a, Var b);

Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var gelu(Var x);
Var activate(Var x, Activation a);

/// x[..., in] * W[out, in]^T + b[out]. Pass an invalid Var for no bias.
Var linear(Var x, Var w, Var b);

/// Same-padding stride-1 convolution on [B, C, H, W]; w is [Cout, Cin/groups, kh, kw].
Var conv2d(Var x, Var w, Var b, std::size_t groups = 1);

/// Per-channel normalization of [B, C, H, W]. Training mode uses batch
/// statistics and updates the running buffers; eval mode uses the buffers.
Var batchnorm2d(Var x, Var gamma, Var beta, Parameter& running_mean, Parameter& running_var,
                double momentum = 0.1, double eps = 1e-5);

/// Normalization over the last axis.
Var layernorm(Var x, Var gamma, Var beta, double eps = 1e-5);

Var softmax_last(Var x);

/// [B, M, K] x [B, K, N] -> [B, M, N]; with transpose_b, b is [B, N, K].
Var bmm(Var a, Var b, bool transpose_b = false);

Var permute(Var x, const std::vector<std::size_t>& perm);
Var reshape(Var x, Shape shape);

/// Inverted dropout, identity outside training mode or when p == 0.
Var dropout(Var x, double p);

/// Global average pool of [B, C, H, W] -> [B, C].
Var global_avg_pool(Var x);
/// x[B, C, H, W] * s[B, C] broadcast over (H, W).
Var channel_scale(Var x, Var s);

/// Gathers steps of axis 2 of x[B, C, T, N]: y[:, :, i, :] = x[:, :, index[i], :].
Var take_axis2(Var x, const std::vector<std::size_t>& index);

/// x[..., begin:begin+count] along the last axis.
Var slice_last(Var x, std::size_t begin, std::size_t count);

/// x[B, T, F] -> x[:, t, :] as [B, F].
Var select_axis1(Var x, std::size_t t);

/// Mean over `groups` equal contiguous chunks of sum|pred - target|^2 / sum|target|^2.
/// Throws kZeroTarget when a chunk's target is all zero.
Var nmse_loss(Var pred, Var target, std::size_t groups);

}  // namespace csi4cast::nn
