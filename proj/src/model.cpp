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

#include "csi4cast/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csi4cast/keyvalue.hpp"

namespace csi4cast {

using nn::Graph;
using nn::Tensor;
using nn::Var;

std::string_view to_string(CombineOp op) { return op == CombineOp::kAdd ? "add" : "multiply"; }

CombineOp parse_combine_op(std::string_view s) {
  if (s == "add") return CombineOp::kAdd;
  if (s == "multiply") return CombineOp::kMultiply;
  throw Error(ErrorCode::kConfigError, "unknown combine op '" + std::string(s) + "'");
}

std::vector<std::size_t> Csi4CastConfig::channel_schedule() const {
  if (!cnn_channels.empty()) return cnn_channels;
  std::vector<std::size_t> up;
  for (std::size_t i = 1; i <= cnn_depth; ++i) up.push_back(std::size_t{1} << i);
  std::vector<std::size_t> out = up;
  for (std::size_t i = up.size() - 1; i-- > 0;) out.push_back(up[i]);
  return out;
}

void Csi4CastConfig::validate() const {
  if (cnn_channels.empty() && (cnn_depth < 2 || cnn_depth > 16)) {
    throw Error(ErrorCode::kConfigError, "cnn_depth must lie in [2, 16]");
  }
  const auto sched = channel_schedule();
  if (sched.size() < 2 || sched.front() != 2 || sched.back() != 2) {
    throw Error(ErrorCode::kConfigError, "CNN schedule must start and end with 2 channels");
  }
  for (std::size_t i = 0; i < sched.size(); ++i) {
    if (sched[i] == 0 || sched[i] != sched[sched.size() - 1 - i]) {
      throw Error(ErrorCode::kConfigError, "CNN channel schedule is not symmetric");
    }
  }
  if (cnn_kernel_h % 2 == 0 || cnn_kernel_w % 2 == 0 || shuffle_kernel % 2 == 0) {
    throw Error(ErrorCode::kConfigError, "kernel sizes must be odd");
  }
  for (const AclConfig* a : {&acl_time, &acl_subcarrier}) {
    if (a->layers < 1 || a->hidden < 1) throw Error(ErrorCode::kConfigError, "empty ACL MLP");
  }
  if (shuffle_maps == 0 || shuffle_groups == 0 || shuffle_maps % shuffle_groups != 0) {
    throw Error(ErrorCode::kConfigError, "shuffle_maps must be divisible by shuffle_groups");
  }
  if (latent < 2) throw Error(ErrorCode::kConfigError, "latent dimension must be >= 2");
  if (heads == 0 || latent % heads != 0) {
    throw Error(ErrorCode::kConfigError, "heads must divide the latent dimension");
  }
  if (ffn_hidden == 0 || encoder_layers == 0) {
    throw Error(ErrorCode::kConfigError, "transformer dimensions must be positive");
  }
  for (double p : {dropout, shuffle_dropout}) {
    if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::kConfigError, "dropout must lie in [0, 1)");
  }
}

Var cnn_residual(Graph& g, Var x, const CnnBlock& block) {
  Var y = x;
  for (std::size_t i = 0; i < block.convs.size(); ++i) {
    y = block.convs[i](g, y);
    if (i < block.norms.size()) y = nn::activate(block.norms[i](g, y), block.activation);
  }
  if (y.shape() != x.shape()) {
    throw Error(ErrorCode::kConfigError, "CNN branch changes the tensor shape");
  }
  return block.residual ? nn::add(x, y) : y;
}

Var to_frequency_matrix(Var x) {
  const auto& s = x.shape();
  const std::size_t B = s[0], T = s[2], N = s[3];
  return nn::reshape(nn::permute(x, {0, 2, 1, 3}), {B, T, 2 * N});
}

Var from_frequency_matrix(Var x) {
  const auto& s = x.shape();
  const std::size_t B = s[0], T = s[1], N = s[2] / 2;
  return nn::permute(nn::reshape(x, {B, T, 2, N}), {0, 2, 1, 3});
}

Tensor complex_right_multiply_weight(const std::vector<cdouble>& c, std::size_t n) {
  // [a b] [[P, Q], [-Q, P]] = [aP - bQ, aQ + bP]; linear uses x W^T, so W is the transpose.
  Tensor w({2 * n, 2 * n});
  auto at = [&](std::size_t r, std::size_t col) -> double& { return w.data[r * 2 * n + col]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = c[i * n + j].real(), q = c[i * n + j].imag();
      // M[i][j] = p, M[i][n+j] = q, M[n+i][j] = -q, M[n+i][n+j] = p; W = M^T.
      at(j, i) = p;
      at(n + j, i) = q;
      at(j, n + i) = -q;
      at(n + j, n + i) = p;
    }
  return w;
}

std::vector<cdouble> unitary_dft_matrix(std::size_t n) {
  std::vector<cdouble> f(n * n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < n; ++m) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * m) % n) /
                           static_cast<double>(n);
      f[k * n + m] = std::polar(norm, angle);
    }
  return f;
}

namespace {

std::vector<cdouble> dft_adjoint(std::size_t n) {
  auto f = unitary_dft_matrix(n);
  std::vector<cdouble> h(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h[i * n + j] = std::conj(f[j * n + i]);
  return h;
}

Var apply_complex_matrix(Graph& g, Var x, const std::vector<cdouble>& c, std::size_t n) {
  if (x.shape().back() != 2 * n) {
    throw Error(ErrorCode::kDimensionMismatch, "last axis must hold 2N real values");
  }
  return nn::linear(x, g.input(complex_right_multiply_weight(c, n)), Var{});
}

Tensor run_const(const Tensor& x, Var (*fn)(Graph&, Var)) {
  Graph g(false);
  return fn(g, g.input(x)).value();
}

}  // namespace

Var idft_delay_transform(Graph& g, Var x_f) {
  const std::size_t n = x_f.shape().back() / 2;
  return apply_complex_matrix(g, x_f, dft_adjoint(n), n);
}

Var dft_transform(Graph& g, Var x_d) {
  const std::size_t n = x_d.shape().back() / 2;
  return apply_complex_matrix(g, x_d, unitary_dft_matrix(n), n);
}

Tensor idft_delay_transform(const Tensor& x_f) {
  return run_const(x_f, static_cast<Var (*)(Graph&, Var)>(&idft_delay_transform));
}

Tensor dft_transform(const Tensor& x_d) {
  return run_const(x_d, static_cast<Var (*)(Graph&, Var)>(&dft_transform));
}

namespace {
Var combine(Var mlp_out, Var x, CombineOp op) {
  return op == CombineOp::kAdd ? nn::add(mlp_out, x) : nn::mul(mlp_out, x);
}
}  // namespace

Var acl_forward(Graph& g, Var x, const AclBlock& block, bool apply_subcarrier) {
  if (apply_subcarrier && !block.subcarrier) {
    throw Error(ErrorCode::kConfigError, "subcarrier ACL stage is only built for FDD");
  }
  Var cols = nn::permute(x, {0, 2, 1});
  Var m = nn::permute(block.time(g, cols), {0, 2, 1});
  x = combine(m, x, block.combine);
  if (apply_subcarrier) x = combine((*block.subcarrier)(g, x), x, block.subcarrier_combine);
  return x;
}

std::vector<std::size_t> channel_shuffle_order(std::size_t channels, std::size_t groups) {
  if (groups == 0 || channels % groups != 0) {
    throw Error(ErrorCode::kConfigError, "channel count must be divisible by groups");
  }
  const std::size_t per = channels / groups;
  std::vector<std::size_t> order;
  order.reserve(channels);
  for (std::size_t a = 0; a < per; ++a)
    for (std::size_t b = 0; b < groups; ++b) order.push_back(b * per + a);
  return order;
}

Var channel_shuffle(Var x, std::size_t groups) {
  const auto s = x.shape();
  const std::size_t B = s[0], C = s[1], HW = s[2] * s[3];
  if (groups == 0 || C % groups != 0) {
    throw Error(ErrorCode::kConfigError, "channel count must be divisible by groups");
  }
  Var y = nn::reshape(x, {B, groups, C / groups, HW});
  y = nn::permute(y, {0, 2, 1, 3});
  return nn::reshape(y, s);
}

Var shuffle_block_forward(Graph& g, Var x, const ShuffleBlock& block) {
  Var fe = block.pw1(g, x);
  fe = channel_shuffle(fe, block.groups);
  fe = block.dw(g, fe);
  fe = block.pw2(g, fe);
  Var s = nn::global_avg_pool(fe);
  s = nn::sigmoid(block.se2(g, nn::relu(block.se1(g, s))));
  return nn::dropout(nn::channel_scale(fe, s), block.dropout);
}

Var shuffle_stage(Graph& g, Var x, const ShuffleStage& stage) {
  Var y = stage.project_in(g, from_frequency_matrix(x));
  for (const auto& b : stage.blocks) y = shuffle_block_forward(g, y, b);
  return to_frequency_matrix(stage.project_out(g, y));
}

Tensor position_embedding(std::size_t hist_len, std::size_t latent) {
  if (latent < 2) throw Error(ErrorCode::kConfigError, "latent dimension must be >= 2");
  Tensor pe({hist_len, latent});
  const double base = static_cast<double>(hist_len);
  for (std::size_t v = 0; v < hist_len; ++v)
    for (std::size_t u = 0; u < latent; ++u) {
      const std::size_t even = u - (u % 2);
      const double angle =
          static_cast<double>(v) / std::pow(base, static_cast<double>(even) / static_cast<double>(latent));
      pe.data[v * latent + u] = u % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

Var transformer_encode(Graph& g, Var x_te, const Tensor& pe,
                       const std::vector<nn::EncoderLayer>& layers) {
  Var x = nn::add_suffix(x_te, g.input(pe));
  for (const auto& layer : layers) x = layer(g, x);
  return x;
}

Var prediction_head(Graph& g, Var x_tf, const nn::Linear& mlp_a, const nn::Linear& mlp_b) {
  Var y = mlp_a(g, x_tf);                          // [B, T, 2N]
  y = mlp_b(g, nn::permute(y, {0, 2, 1}));         // [B, 2N, P]
  const std::size_t B = y.shape()[0], N = y.shape()[1] / 2, P = y.shape()[2];
  return nn::permute(nn::reshape(y, {B, 2, N, P}), {0, 1, 3, 2});
}

namespace {

nn::Mlp make_acl_mlp(nn::ParameterSet& ps, const std::string& name, std::size_t width,
                     const AclConfig& c, Engine& rng) {
  std::vector<std::size_t> dims{width};
  for (std::size_t i = 1; i < c.layers; ++i) dims.push_back(c.hidden);
  dims.push_back(width);
  nn::Mlp mlp(ps, name, dims, c.activation, c.output, rng);
  // Identity start: the combined output equals the input.
  auto& last = mlp.layers.back();
  std::fill(last.weight->value.data.begin(), last.weight->value.data.end(), 0.0);
  const double bias =
      c.combine == CombineOp::kMultiply && c.output == nn::Activation::kNone ? 1.0 : 0.0;
  std::fill(last.bias->value.data.begin(), last.bias->value.data.end(), bias);
  return mlp;
}

AclBlock make_acl(nn::ParameterSet& ps, const std::string& name, const Csi4CastConfig& c,
                  const SystemConfig& sys, Engine& rng) {
  AclBlock b;
  b.combine = c.acl_time.combine;
  b.time = make_acl_mlp(ps, name + ".time", sys.hist_len, c.acl_time, rng);
  if (sys.duplex == Duplex::kFdd) {
    b.subcarrier_combine = c.acl_subcarrier.combine;
    b.subcarrier = make_acl_mlp(ps, name + ".subcarrier", 2 * sys.n_sc, c.acl_subcarrier, rng);
  }
  return b;
}

ShuffleStage make_shuffle(nn::ParameterSet& ps, const std::string& name, const Csi4CastConfig& c,
                          Engine& rng) {
  ShuffleStage st;
  const std::size_t rho = c.shuffle_maps, eta = c.shuffle_groups, mu = c.shuffle_kernel;
  st.project_in = nn::Conv2d(ps, name + ".in", 2, rho, 1, 1, 1, rng);
  for (std::size_t i = 0; i < c.shuffle_blocks; ++i) {
    const std::string p = name + ".block" + std::to_string(i);
    ShuffleBlock b;
    b.groups = eta;
    b.dropout = c.shuffle_dropout;
    b.pw1 = nn::Conv2d(ps, p + ".pw1", rho, rho, 1, 1, eta, rng);
    b.dw = nn::Conv2d(ps, p + ".dw", rho, rho, mu, mu, rho, rng);
    b.pw2 = nn::Conv2d(ps, p + ".pw2", rho, rho, 1, 1, eta, rng);
    const std::size_t squeeze = std::max<std::size_t>(1, rho / 4);
    b.se1 = nn::Linear(ps, p + ".se1", rho, squeeze, rng);
    b.se2 = nn::Linear(ps, p + ".se2", squeeze, rho, rng);
    st.blocks.push_back(b);
  }
  st.project_out = nn::Conv2d(ps, name + ".out", rho, 2, 1, 1, 1, rng);
  return st;
}

}  // namespace

Csi4CastModel::Csi4CastModel(const Csi4CastConfig& config, const SystemConfig& system,
                             std::uint64_t seed)
    : config_(config), system_(system) {
  config_.validate();
  system_.validate();
  Engine rng = make_engine(seed, stream::kInit);
  const auto sched = config_.channel_schedule();
  cnn_.activation = config_.cnn_activation;
  cnn_.residual = config_.cnn_residual;
  for (std::size_t i = 0; i + 1 < sched.size(); ++i) {
    const std::string name = "cnn." + std::to_string(i);
    const bool normed = i + 2 < sched.size();  // a bias ahead of batch norm cancels out
    cnn_.convs.emplace_back(params_, name + ".conv", sched[i], sched[i + 1], config_.cnn_kernel_h,
                            config_.cnn_kernel_w, 1, rng, !normed);
    if (normed) cnn_.norms.emplace_back(params_, name + ".bn", sched[i + 1]);
  }
  if (cnn_.residual) {
    // The untrained residual branch starts at the identity map.
    auto& last = cnn_.convs.back();
    std::fill(last.weight->value.data.begin(), last.weight->value.data.end(), 0.0);
  }
  acl_f_ = make_acl(params_, "acl_f", config_, system_, rng);
  acl_d_ = make_acl(params_, "acl_d", config_, system_, rng);
  sh_f_ = make_shuffle(params_, "shuffle_f", config_, rng);
  sh_d_ = make_shuffle(params_, "shuffle_d", config_, rng);
  token_ = nn::Linear(params_, "token", 2 * system_.n_sc, config_.latent, rng);
  pe_ = position_embedding(system_.hist_len, config_.latent);
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    encoder_.emplace_back(params_, "encoder." + std::to_string(i), config_.latent, config_.heads,
                          config_.ffn_hidden, config_.ffn_activation, config_.dropout, rng);
  }
  head_a_ = nn::Linear(params_, "head.a", config_.latent, 2 * system_.n_sc, rng);
  head_b_ = nn::Linear(params_, "head.b", system_.hist_len, system_.pred_len, rng);
}

namespace {

// Per-row RMS of x[B, ...] broadcast to the shapes of the input and the output.
std::pair<Tensor, Tensor> row_scales(const Tensor& x, const nn::Shape& out_shape) {
  const std::size_t B = x.dim(0), per_in = x.numel() / B, per_out = nn::shape_numel(out_shape) / B;
  Tensor inv(x.shape), fwd(out_shape);
  for (std::size_t b = 0; b < B; ++b) {
    double e = 0.0;
    for (std::size_t i = 0; i < per_in; ++i) e += x.data[b * per_in + i] * x.data[b * per_in + i];
    const double rms = std::sqrt(e / static_cast<double>(per_in));
    std::fill_n(inv.data.begin() + b * per_in, per_in, rms > 0.0 ? 1.0 / rms : 0.0);
    std::fill_n(fwd.data.begin() + b * per_out, per_out, rms);
  }
  return {std::move(inv), std::move(fwd)};
}

}  // namespace

Var Csi4CastModel::forward(Graph& g, Var x) const {
  const auto& s = x.shape();
  if (s.size() != 4 || s[1] != 2 || s[2] != system_.hist_len || s[3] != system_.n_sc) {
    throw Error(ErrorCode::kDimensionMismatch, "model input " + nn::shape_string(s) +
                                                   " does not match the system config");
  }
  const bool fdd = system_.duplex == Duplex::kFdd;
  // The scale is a constant of the input; the NMSE loss is invariant to it.
  std::pair<Tensor, Tensor> scales;
  if (config_.input_scaling) {
    scales = row_scales(x.value(), {s[0], 2, system_.pred_len, s[3]});
    x = nn::mul(x, g.input(scales.first));
  }
  Var x_cnn = cnn_residual(g, x, cnn_);
  Var x_f = to_frequency_matrix(x_cnn);
  Var x_d = idft_delay_transform(g, x_f);
  Var sb_f = shuffle_stage(g, acl_forward(g, x_f, acl_f_, fdd), sh_f_);
  Var sb_d = shuffle_stage(g, acl_forward(g, x_d, acl_d_, fdd), sh_d_);
  Var x_te = token_(g, nn::add(sb_f, sb_d));
  Var x_tf = transformer_encode(g, x_te, pe_, encoder_);
  Var y = prediction_head(g, x_tf, head_a_, head_b_);
  return config_.input_scaling ? nn::mul(y, g.input(scales.second)) : y;
}

std::vector<std::pair<std::string, std::string>> describe(const Csi4CastConfig& c) {
  using kv::format_bool;
  using kv::format_double;
  kv::Entries e = {
      {"model.cnn_depth", std::to_string(c.cnn_depth)},
      {"model.cnn_channels", kv::format_size_list(c.cnn_channels)},
      {"model.cnn_kernel_h", std::to_string(c.cnn_kernel_h)},
      {"model.cnn_kernel_w", std::to_string(c.cnn_kernel_w)},
      {"model.cnn_residual", format_bool(c.cnn_residual)},
      {"model.cnn_activation", nn::to_string(c.cnn_activation)},
  };
  for (const auto& [prefix, a] : {std::pair{"model.acl_time.", &c.acl_time},
                                  std::pair{"model.acl_subcarrier.", &c.acl_subcarrier}}) {
    const std::string p = prefix;
    e.push_back({p + "layers", std::to_string(a->layers)});
    e.push_back({p + "hidden", std::to_string(a->hidden)});
    e.push_back({p + "activation", nn::to_string(a->activation)});
    e.push_back({p + "output", nn::to_string(a->output)});
    e.push_back({p + "combine", std::string(to_string(a->combine))});
  }
  e.insert(e.end(), {
                        {"model.shuffle_maps", std::to_string(c.shuffle_maps)},
                        {"model.shuffle_groups", std::to_string(c.shuffle_groups)},
                        {"model.shuffle_kernel", std::to_string(c.shuffle_kernel)},
                        {"model.shuffle_blocks", std::to_string(c.shuffle_blocks)},
                        {"model.shuffle_dropout", format_double(c.shuffle_dropout)},
                        {"model.latent", std::to_string(c.latent)},
                        {"model.encoder_layers", std::to_string(c.encoder_layers)},
                        {"model.heads", std::to_string(c.heads)},
                        {"model.ffn_hidden", std::to_string(c.ffn_hidden)},
                        {"model.dropout", format_double(c.dropout)},
                        {"model.ffn_activation", nn::to_string(c.ffn_activation)},
                        {"model.input_scaling", format_bool(c.input_scaling)},
                    });
  return e;
}

void apply_model_key(Csi4CastConfig& c, const std::string& key, const std::string& value) {
  auto acl_key = [&](AclConfig& a, const std::string& field) {
    if (field == "layers") a.layers = kv::parse_size(key, value);
    else if (field == "hidden") a.hidden = kv::parse_size(key, value);
    else if (field == "activation") a.activation = nn::parse_activation(value);
    else if (field == "output") a.output = nn::parse_activation(value);
    else if (field == "combine") a.combine = parse_combine_op(value);
    else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
  };
  if (key.rfind("model.acl_time.", 0) == 0) return acl_key(c.acl_time, key.substr(15));
  if (key.rfind("model.acl_subcarrier.", 0) == 0) return acl_key(c.acl_subcarrier, key.substr(21));
  if (key == "model.cnn_depth") c.cnn_depth = kv::parse_size(key, value);
  else if (key == "model.cnn_channels") c.cnn_channels = kv::parse_size_list(key, value);
  else if (key == "model.cnn_kernel_h") c.cnn_kernel_h = kv::parse_size(key, value);
  else if (key == "model.cnn_kernel_w") c.cnn_kernel_w = kv::parse_size(key, value);
  else if (key == "model.cnn_residual") c.cnn_residual = kv::parse_bool(key, value);
  else if (key == "model.cnn_activation") c.cnn_activation = nn::parse_activation(value);
  else if (key == "model.shuffle_maps") c.shuffle_maps = kv::parse_size(key, value);
  else if (key == "model.shuffle_groups") c.shuffle_groups = kv::parse_size(key, value);
  else if (key == "model.shuffle_kernel") c.shuffle_kernel = kv::parse_size(key, value);
  else if (key == "model.shuffle_blocks") c.shuffle_blocks = kv::parse_size(key, value);
  else if (key == "model.shuffle_dropout") c.shuffle_dropout = kv::parse_double(key, value);
  else if (key == "model.latent") c.latent = kv::parse_size(key, value);
  else if (key == "model.encoder_layers") c.encoder_layers = kv::parse_size(key, value);
  else if (key == "model.heads") c.heads = kv::parse_size(key, value);
  else if (key == "model.ffn_hidden") c.ffn_hidden = kv::parse_size(key, value);
  else if (key == "model.dropout") c.dropout = kv::parse_double(key, value);
  else if (key == "model.ffn_activation") c.ffn_activation = nn::parse_activation(value);
  else if (key == "model.input_scaling") c.input_scaling = kv::parse_bool(key, value);
  else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
}

std::vector<std::pair<std::string, std::string>> Csi4CastModel::describe() const {
  return csi4cast::describe(config_);
}

}  // namespace csi4cast
