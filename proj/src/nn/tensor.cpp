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

#include "csi4cast/nn/tensor.hpp"

#include <algorithm>

#include "csi4cast/error.hpp"

namespace csi4cast::nn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_numel(shape)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "tensor data size " + std::to_string(data.size()) + " does not fit shape " +
                    shape_string(shape));
  }
}

void Parameter::zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }

Parameter& ParameterSet::add(const std::string& name, Shape shape, bool buffer) {
  if (find(name)) throw Error(ErrorCode::kConfigError, "duplicate parameter name " + name);
  params_.push_back(std::make_unique<Parameter>(name, std::move(shape), buffer));
  return *params_.back();
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParameterSet::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (!p->buffer) out.push_back(p.get());
  return out;
}

std::size_t ParameterSet::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_)
    if (!p->buffer) n += p->numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::vector<Tensor> ParameterSet::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParameterSet::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "snapshot has a different parameter count");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape != params_[i]->value.shape) {
      throw Error(ErrorCode::kDimensionMismatch, "snapshot shape differs for " + params_[i]->name);
    }
    params_[i]->value = values[i];
  }
}

}  // namespace csi4cast::nn
