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

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace csi4cast::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major double tensor.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(shape_numel(shape), fill) {}
  Tensor(Shape s, std::vector<double> d);

  std::size_t numel() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }

  bool operator==(const Tensor&) const = default;
};

/// A named tensor owned by a model. Buffers (batch-norm running statistics)
/// are saved with the model but never receive gradients.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool buffer = false;

  Parameter(std::string n, Shape shape, bool is_buffer = false)
      : name(std::move(n)), value(shape), grad(shape), buffer(is_buffer) {}

  std::size_t numel() const { return value.numel(); }
  void zero_grad();
};

class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  /// Registers a zero-initialized tensor. Names must be unique.
  Parameter& add(const std::string& name, Shape shape, bool buffer = false);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  /// Parameters that receive gradients (no buffers).
  std::vector<Parameter*> trainable();

  std::size_t size() const { return params_.size(); }
  /// Element count of the non-buffer tensors.
  std::size_t trainable_count() const;

  void zero_grad();

  /// Values of every tensor, buffers included, in registration order.
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace csi4cast::nn
