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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "csi4cast/checkpoint.hpp"
#include "csi4cast/keyvalue.hpp"

namespace csi4cast {

enum class OptimizerKind { kAdam, kAdamW };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view s);

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t accumulate = 1;  // micro-batches per optimizer step
  std::size_t max_epochs = 50;
  std::size_t early_stop_patience = 5;

  OptimizerKind optimizer = OptimizerKind::kAdamW;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  double plateau_factor = 0.5;
  std::size_t plateau_patience = 2;
  double min_lr = 1e-6;
  double plateau_threshold = 1e-4;  // relative

  std::uint64_t seed = 0;
  std::string precision = "float64";
  double val_fraction = 0.1;
  bool fresh_noise = false;

  /// Throws kConfigError when an invariant is violated.
  void validate() const;
};

kv::Entries describe(const TrainConfig& c);
/// Accepts train.* keys.
void apply_train_key(TrainConfig& c, const std::string& key, const std::string& value);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_nmse;
  std::vector<double> lr;
  std::vector<double> epoch_seconds;
  std::size_t best_epoch = 0;

  std::size_t epochs() const { return train_loss.size(); }
  double best_val_nmse() const { return val_nmse.at(best_epoch); }
  /// Columns epoch,train_loss,val_nmse,lr; wall-clock is left out so files are reproducible.
  void write_csv(const std::filesystem::path& path) const;
};

/// Adam and AdamW over a model's trainable parameters.
class Optimizer {
 public:
  Optimizer(nn::ParameterSet& params, const TrainConfig& cfg);
  /// Applies one update from the accumulated gradients at learning rate `lr`.
  void step(double lr);

 private:
  std::vector<nn::Parameter*> params_;
  std::vector<std::vector<double>> m_, v_;
  OptimizerKind kind_;
  double wd_, b1_, b2_, eps_;
  std::size_t t_ = 0;
};

/// ReduceLROnPlateau in "min" mode with a relative threshold.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, std::size_t patience, double min_lr,
                   double threshold);
  /// Feeds one validation value and returns the learning rate for the next epoch.
  double observe(double value);
  double lr() const { return lr_; }

 private:
  double lr_, factor_, min_lr_, threshold_;
  std::size_t patience_, bad_ = 0;
  double best_;
};

/// Deterministic 9:1-style split by hashed sample index. Both parts are nonempty when n >= 2.
struct Split {
  std::vector<std::size_t> train, validation;
};
Split split_indices(std::size_t n, double val_fraction, std::uint64_t seed);

struct EpochReport {
  std::size_t epoch;
  double train_loss;
  double val_nmse;
  double lr;
};

/// Trains `model` in place and leaves it at the epoch with the lowest validation NMSE.
TrainHistory train(Predictor& model, const CsiDataset& dataset, const TrainConfig& cfg,
                   const std::function<void(const EpochReport&)>& on_epoch = {});

/// Mean per-sample NMSE of eval-mode predictions over `indices` of `dataset`.
double evaluate_nmse(const Predictor& model, const CsiDataset& dataset,
                     const std::vector<std::size_t>& indices, std::size_t batch_size = 64);

struct GradientCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  /// Uniform perturbation added to every trainable entry so zero-initialized
  /// layers do not hide gradient paths.
  double perturb = 0.2;
  /// Test hook applied to the analytic gradients before comparison.
  std::function<void(nn::ParameterSet&)> corrupt;
};

struct GradientCheckReport {
  std::vector<std::pair<std::string, double>> per_parameter;  // max relative error
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_rel_error < tolerance; }
};

/// Analytic parameter gradients of the NMSE loss on `sample` against central
/// differences. Runs in training mode; dropout should be zero.
GradientCheckReport gradient_check(Predictor& model, const CsiSample& sample,
                                   const GradientCheckOptions& opt = {});
/// Builds the model described by `spec` plus one random sample, then checks.
GradientCheckReport gradient_check(const ModelSpec& spec, const GradientCheckOptions& opt = {});

}  // namespace csi4cast
