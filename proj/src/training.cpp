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

#include "csi4cast/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "csi4cast/channel_sim.hpp"
#include "csi4cast/metrics.hpp"

namespace csi4cast {

std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "adamw";
}

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "adamw") return OptimizerKind::kAdamW;
  throw Error(ErrorCode::kInvalidConfig, "unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kConfigError, m); };
  if (!(lr >= 0.0)) fail("lr must be nonnegative");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) fail("plateau factor must be in (0, 1)");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("validation fraction must be in (0, 1)");
  if (batch_size == 0 || accumulate == 0) fail("batch size and accumulation must be positive");
  if (max_epochs == 0) fail("max_epochs must be positive");
  if (precision != "float64") fail("only float64 precision is supported");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) fail("betas must be in [0, 1)");
  if (weight_decay < 0.0 || min_lr < 0.0 || plateau_threshold < 0.0) fail("negative setting");
}

kv::Entries describe(const TrainConfig& c) {
  using kv::format_double;
  return {
      {"train.batch_size", std::to_string(c.batch_size)},
      {"train.accumulate", std::to_string(c.accumulate)},
      {"train.max_epochs", std::to_string(c.max_epochs)},
      {"train.early_stop_patience", std::to_string(c.early_stop_patience)},
      {"train.optimizer", std::string(to_string(c.optimizer))},
      {"train.lr", format_double(c.lr)},
      {"train.weight_decay", format_double(c.weight_decay)},
      {"train.beta1", format_double(c.beta1)},
      {"train.beta2", format_double(c.beta2)},
      {"train.eps", format_double(c.eps)},
      {"train.plateau_factor", format_double(c.plateau_factor)},
      {"train.plateau_patience", std::to_string(c.plateau_patience)},
      {"train.min_lr", format_double(c.min_lr)},
      {"train.plateau_threshold", format_double(c.plateau_threshold)},
      {"train.precision", c.precision},
      {"train.val_fraction", format_double(c.val_fraction)},
      {"train.fresh_noise", kv::format_bool(c.fresh_noise)},
  };
}

void apply_train_key(TrainConfig& c, const std::string& key, const std::string& v) {
  using kv::parse_double;
  using kv::parse_size;
  if (key == "train.batch_size") c.batch_size = parse_size(key, v);
  else if (key == "train.accumulate") c.accumulate = parse_size(key, v);
  else if (key == "train.max_epochs") c.max_epochs = parse_size(key, v);
  else if (key == "train.early_stop_patience") c.early_stop_patience = parse_size(key, v);
  else if (key == "train.optimizer") c.optimizer = parse_optimizer(v);
  else if (key == "train.lr") c.lr = parse_double(key, v);
  else if (key == "train.weight_decay") c.weight_decay = parse_double(key, v);
  else if (key == "train.beta1") c.beta1 = parse_double(key, v);
  else if (key == "train.beta2") c.beta2 = parse_double(key, v);
  else if (key == "train.eps") c.eps = parse_double(key, v);
  else if (key == "train.plateau_factor") c.plateau_factor = parse_double(key, v);
  else if (key == "train.plateau_patience") c.plateau_patience = parse_size(key, v);
  else if (key == "train.min_lr") c.min_lr = parse_double(key, v);
  else if (key == "train.plateau_threshold") c.plateau_threshold = parse_double(key, v);
  else if (key == "train.precision") c.precision = v;
  else if (key == "train.val_fraction") c.val_fraction = parse_double(key, v);
  else if (key == "train.fresh_noise") c.fresh_noise = kv::parse_bool(key, v);
  else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
}

void TrainHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  os << "epoch,train_loss,val_nmse,lr\n";
  for (std::size_t i = 0; i < epochs(); ++i) {
    os << i << ',' << kv::format_double(train_loss[i]) << ',' << kv::format_double(val_nmse[i])
       << ',' << kv::format_double(lr[i]) << '\n';
  }
}

Optimizer::Optimizer(nn::ParameterSet& params, const TrainConfig& cfg)
    : params_(params.trainable()),
      kind_(cfg.optimizer),
      wd_(cfg.weight_decay),
      b1_(cfg.beta1),
      b2_(cfg.beta2),
      eps_(cfg.eps) {
  for (const auto* p : params_) {
    m_.emplace_back(p->numel(), 0.0);
    v_.emplace_back(p->numel(), 0.0);
  }
}

void Optimizer::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Parameter& p = *params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      double g = p.grad.data[j];
      double& w = p.value.data[j];
      if (kind_ == OptimizerKind::kAdam) g += wd_ * w;
      else w -= lr * wd_ * w;
      m[j] = b1_ * m[j] + (1.0 - b1_) * g;
      v[j] = b2_ * v[j] + (1.0 - b2_) * g * g;
      w -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

PlateauScheduler::PlateauScheduler(double lr, double factor, std::size_t patience, double min_lr,
                                   double threshold)
    : lr_(lr),
      factor_(factor),
      min_lr_(min_lr),
      threshold_(threshold),
      patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::observe(double value) {
  if (value < best_ * (1.0 - threshold_)) {
    best_ = value;
    bad_ = 0;
  } else if (++bad_ > patience_) {
    lr_ = std::max(lr_ * factor_, min_lr_);
    bad_ = 0;
  }
  return lr_;
}

Split split_indices(std::size_t n, double val_fraction, std::uint64_t seed) {
  Split s;
  const std::uint64_t key = derive_seed(seed, stream::kSplit);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(splitmix64(key ^ (i * 0x9E3779B97F4A7C15ULL)) >> 11) *
                     (1.0 / 9007199254740992.0);
    (u < val_fraction ? s.validation : s.train).push_back(i);
  }
  if (n >= 2 && s.validation.empty()) {
    s.validation.push_back(s.train.back());
    s.train.pop_back();
  } else if (n >= 2 && s.train.empty()) {
    s.train.push_back(s.validation.back());
    s.validation.pop_back();
  }
  return s;
}

double evaluate_nmse(const Predictor& model, const CsiDataset& dataset,
                     const std::vector<std::size_t>& indices, std::size_t batch_size) {
  if (indices.empty()) throw Error(ErrorCode::kEmptySubset, "no samples to evaluate");
  double acc = 0.0;
  for (std::size_t b = 0; b < indices.size(); b += batch_size) {
    const std::size_t e = std::min(indices.size(), b + batch_size);
    std::vector<const CsiSequence*> hist;
    for (std::size_t i = b; i < e; ++i) hist.push_back(&dataset.samples[indices[i]].history);
    const auto pred = model.predict(hist);
    for (std::size_t i = b; i < e; ++i) {
      acc += nmse_metric(pred[i - b], dataset.samples[indices[i]].target);
    }
  }
  return acc / static_cast<double>(indices.size());
}

namespace {

double run_micro_batch(const Predictor& model, const std::vector<const CsiSequence*>& hist,
                       const std::vector<const CsiSequence*>& target, double weight,
                       std::uint64_t dropout_seed) {
  nn::Graph g(true, dropout_seed);
  nn::Var y = model.forward(g, g.input(stack_sequences(hist)));
  nn::Var loss = nn::nmse_loss(y, g.input(stack_sequences(target)), hist.size());
  const double value = loss.value().data[0];
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteLoss, "training loss is " + kv::format_double(value));
  }
  if (weight != 1.0) loss = nn::scale(loss, weight);
  g.backward(loss);
  return value;
}

}  // namespace

TrainHistory train(Predictor& model, const CsiDataset& dataset, const TrainConfig& cfg,
                   const std::function<void(const EpochReport&)>& on_epoch) {
  cfg.validate();
  if (dataset.samples.size() < 2) {
    throw Error(ErrorCode::kConfigError, "training needs at least two samples");
  }
  if (!(dataset.config == model.system())) {
    throw Error(ErrorCode::kConfigError, "dataset and model system configs differ");
  }
  if (cfg.fresh_noise) {
    for (const auto& s : dataset.samples) {
      if (s.scenario.noise_type == NoiseType::kPhase || s.scenario.noise_type == NoiseType::kBurst) {
        throw Error(ErrorCode::kConfigError, "fresh noise supports NONE, AWGN and PACKET_DROP only");
      }
    }
  }

  const Split split = split_indices(dataset.samples.size(), cfg.val_fraction, cfg.seed);
  nn::ParameterSet& params = model.parameters();
  Optimizer opt(params, cfg);
  PlateauScheduler sched(cfg.lr, cfg.plateau_factor, cfg.plateau_patience, cfg.min_lr,
                         cfg.plateau_threshold);
  TrainHistory hist;
  std::vector<nn::Tensor> best = params.snapshot();
  double best_val = std::numeric_limits<double>::infinity();
  double stop_ref = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;
  std::uint64_t micro_counter = 0;
  std::vector<CsiSequence> fresh;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto t_start = std::chrono::steady_clock::now();
    const double lr = sched.lr();
    std::vector<std::size_t> order = split.train;
    Engine shuffle_rng(derive_seed(derive_seed(cfg.seed, stream::kShuffle), epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng() % i]);
    }
    if (cfg.fresh_noise) {
      fresh.clear();
      for (const auto& s : dataset.samples) {
        fresh.push_back(redraw_history_noise(s, dataset.config, epoch));
      }
    }

    const std::size_t n_micro = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
    double loss_acc = 0.0;
    params.zero_grad();
    for (std::size_t mb = 0; mb < n_micro; ++mb) {
      const std::size_t group_begin = mb - mb % cfg.accumulate;
      const std::size_t group_size = std::min(cfg.accumulate, n_micro - group_begin);
      std::vector<const CsiSequence*> xs, ys;
      const std::size_t b = mb * cfg.batch_size;
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t idx = order[i];
        xs.push_back(cfg.fresh_noise ? &fresh[idx] : &dataset.samples[idx].history);
        ys.push_back(&dataset.samples[idx].target);
      }
      const std::uint64_t dseed = derive_seed(derive_seed(cfg.seed, stream::kDropout), micro_counter++);
      const double l = run_micro_batch(model, xs, ys, 1.0 / static_cast<double>(group_size), dseed);
      loss_acc += l * static_cast<double>(e - b);
      if (mb + 1 == group_begin + group_size) {
        opt.step(lr);
        params.zero_grad();
      }
    }

    const double val = evaluate_nmse(model, dataset, split.validation, std::max<std::size_t>(cfg.batch_size, 64));
    hist.train_loss.push_back(loss_acc / static_cast<double>(order.size()));
    hist.val_nmse.push_back(val);
    hist.lr.push_back(lr);
    hist.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count());
    if (!std::isfinite(val)) {
      throw Error(ErrorCode::kNonFiniteLoss, "validation NMSE is " + kv::format_double(val));
    }
    if (val < best_val) {
      best_val = val;
      hist.best_epoch = epoch;
      best = params.snapshot();
    }
    if (on_epoch) on_epoch({epoch, hist.train_loss.back(), val, lr});

    sched.observe(val);
    if (val < stop_ref * (1.0 - cfg.plateau_threshold)) {
      stop_ref = val;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    if (bad_epochs >= cfg.early_stop_patience) break;
  }
  params.restore(best);
  return hist;
}

namespace {

double loss_at(const Predictor& model, const nn::Tensor& x, const nn::Tensor& y,
               std::size_t groups) {
  nn::Graph g(true, 0);
  nn::Var pred = model.forward(g, g.input(x));
  return nn::nmse_loss(pred, g.input(y), groups).value().data[0];
}

}  // namespace

GradientCheckReport gradient_check(Predictor& model, const CsiSample& sample,
                                   const GradientCheckOptions& opt) {
  nn::ParameterSet& params = model.parameters();
  Engine rng = make_engine(opt.seed, stream::kInit + 100);
  for (nn::Parameter* p : params.trainable()) {
    for (double& v : p->value.data) v += opt.perturb * (2.0 * uniform01(rng) - 1.0);
  }
  const nn::Tensor x = stack_sequences({&sample.history});
  const nn::Tensor y = stack_sequences({&sample.target});

  params.zero_grad();
  {
    nn::Graph g(true, 0);
    nn::Var pred = model.forward(g, g.input(x));
    g.backward(nn::nmse_loss(pred, g.input(y), 1));
  }
  if (opt.corrupt) opt.corrupt(params);

  GradientCheckReport report;
  report.tolerance = opt.tolerance;
  for (nn::Parameter* p : params.trainable()) {
    double max_diff = 0.0, max_a = 0.0, max_n = 0.0;
    for (std::size_t j = 0; j < p->numel(); ++j) {
      double& w = p->value.data[j];
      const double w0 = w;
      w = w0 + opt.step;
      const double lp = loss_at(model, x, y, 1);
      w = w0 - opt.step;
      const double lm = loss_at(model, x, y, 1);
      w = w0;
      const double numeric = (lp - lm) / (2.0 * opt.step);
      const double analytic = p->grad.data[j];
      max_diff = std::max(max_diff, std::abs(analytic - numeric));
      max_a = std::max(max_a, std::abs(analytic));
      max_n = std::max(max_n, std::abs(numeric));
    }
    const double rel = max_diff / std::max({max_a, max_n, 1e-12});
    report.per_parameter.emplace_back(p->name, rel);
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  return report;
}

GradientCheckReport gradient_check(const ModelSpec& spec, const GradientCheckOptions& opt) {
  auto model = make_predictor(spec, opt.seed);
  ScenarioDescriptor sc;
  sc.velocity = 10.0;
  sc.delay_spread = 100e-9;
  sc.duplex = spec.system.duplex;
  sc.noise_type = NoiseType::kAwgn;
  sc.noise_degree = 20.0;
  const CsiDataset ds = make_dataset(sc, spec.system, 1, opt.seed);
  return gradient_check(*model, ds.samples.front(), opt);
}

}  // namespace csi4cast
