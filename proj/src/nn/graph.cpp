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

#include "csi4cast/nn/graph.hpp"

#include <algorithm>

#include "csi4cast/error.hpp"

namespace csi4cast::nn {

const Tensor& Var::value() const { return g->value(*this); }

Graph::Graph(bool training, std::uint64_t dropout_seed)
    : training_(training), rng_(make_engine(dropout_seed, stream::kDropout)) {}

Var Graph::input(Tensor t) { return make(std::move(t), false, nullptr); }

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  const int id = static_cast<int>(nodes_.size());
  Parameter* target = &p;
  Var v = make(p.value, !p.buffer, [target](const Tensor&, const std::vector<double>& dy) {
    for (std::size_t i = 0; i < dy.size(); ++i) target->grad.data[i] += dy[i];
  });
  param_nodes_[&p] = id;
  return v;
}

std::vector<double>& Graph::grad(int id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.numel(), 0.0);
  return node.grad;
}

Var Graph::make(Tensor value, bool needs_grad, Backward back) {
  nodes_.push_back({std::move(value), {}, needs_grad, needs_grad ? std::move(back) : nullptr});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var loss) {
  if (loss.numel() != 1) throw Error(ErrorCode::kDimensionMismatch, "backward needs a scalar");
  grad(loss.id)[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    auto& node = nodes_[id];
    if (node.backward && !node.grad.empty()) node.backward(node.value, node.grad);
  }
}

Activation parse_activation(const std::string& s) {
  if (s == "none") return Activation::kNone;
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "gelu") return Activation::kGelu;
  throw Error(ErrorCode::kConfigError, "unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kGelu: return "gelu";
  }
  return "none";
}

}  // namespace csi4cast::nn
