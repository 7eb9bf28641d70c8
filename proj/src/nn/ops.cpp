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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "csi4cast/error.hpp"
#include "csi4cast/kernels.hpp"
#include "csi4cast/nn/graph.hpp"

namespace csi4cast::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;
using Dy = std::vector<double>;

void require_same_graph(Var a, Var b) {
  if (a.g != b.g) throw Error(ErrorCode::kConfigError, "operands belong to different graphs");
}

void require_same_shape(Var a, Var b, const char* op) {
  require_same_graph(a, b);
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(op) + ": shapes " +
                                                   shape_string(a.shape()) + " and " +
                                                   shape_string(b.shape()));
  }
}

void require_rank(Var a, std::size_t r, const char* op) {
  if (a.value().rank() != r) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(op) + ": expected rank " +
                                                   std::to_string(r) + ", got shape " +
                                                   shape_string(a.shape()));
  }
}

bool ng(Var v) { return v.valid() && v.g->needs_grad(v.id); }

// y = f(x); dx = dy * df(x, y).
template <typename F, typename DF>
Var unary(Var x, F f, DF df) {
  Graph* g = x.g;
  const Tensor& xv = x.value();
  Tensor y(xv.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] = f(xv.data[i]);
  g->add_flops(static_cast<double>(y.numel()));
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, df](const Tensor& out, const Dy& dy) {
    const auto& xd = g->value({g, xi}).data;
    auto& dx = g->grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * df(xd[i], out.data[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Graph* g = a.g;
  Tensor y = a.value();
  const auto& bd = b.value().data;
  for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] += bd[i];
  g->add_flops(static_cast<double>(y.numel()));
  const int ai = a.id, bi = b.id;
  const bool na = ng(a), nb = ng(b);
  return g->make(std::move(y), na || nb, [g, ai, bi, na, nb](const Tensor&, const Dy& dy) {
    if (na) {
      auto& da = g->grad(ai);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
    }
    if (nb) {
      auto& db = g->grad(bi);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Graph* g = a.g;
  Tensor y = a.value();
  const auto& bd = b.value().data;
  for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] -= bd[i];
  g->add_flops(static_cast<double>(y.numel()));
  const int ai = a.id, bi = b.id;
  const bool na = ng(a), nb = ng(b);
  return g->make(std::move(y), na || nb, [g, ai, bi, na, nb](const Tensor&, const Dy& dy) {
    if (na) {
      auto& da = g->grad(ai);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
    }
    if (nb) {
      auto& db = g->grad(bi);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] -= dy[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Graph* g = a.g;
  Tensor y = a.value();
  const auto& bd = b.value().data;
  for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] *= bd[i];
  g->add_flops(static_cast<double>(y.numel()));
  const int ai = a.id, bi = b.id;
  const bool na = ng(a), nb = ng(b);
  return g->make(std::move(y), na || nb, [g, ai, bi, na, nb](const Tensor&, const Dy& dy) {
    const auto& av = g->value({g, ai}).data;
    const auto& bv = g->value({g, bi}).data;
    if (na) {
      auto& da = g->grad(ai);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * bv[i];
    }
    if (nb) {
      auto& db = g->grad(bi);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var add_suffix(Var a, Var b) {
  require_same_graph(a, b);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.rbegin(), bs.rend(), as.rbegin())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "add_suffix: " + shape_string(bs) + " is not a suffix of " + shape_string(as));
  }
  Graph* g = a.g;
  Tensor y = a.value();
  const auto& bd = b.value().data;
  const std::size_t nb = bd.size();
  for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] += bd[i % nb];
  g->add_flops(static_cast<double>(y.numel()));
  const int ai = a.id, bi = b.id;
  const bool na = ng(a), nbg = ng(b);
  return g->make(std::move(y), na || nbg, [g, ai, bi, na, nbg, nb](const Tensor&, const Dy& dy) {
    if (na) {
      auto& da = g->grad(ai);
      for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
    }
    if (nbg) {
      auto& db = g->grad(bi);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i % nb] += dy[i];
    }
  });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var gelu(Var x) {
  constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
      [inv_sqrt_2pi](double v, double) {
        return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Var activate(Var x, Activation a) {
  switch (a) {
    case Activation::kNone: return x;
    case Activation::kRelu: return relu(x);
    case Activation::kTanh: return tanh(x);
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kGelu: return gelu(x);
  }
  return x;
}

Var linear(Var x, Var w, Var b) {
  require_same_graph(x, w);
  require_rank(w, 2, "linear weight");
  Graph* g = x.g;
  const Shape& xs = x.shape();
  const std::size_t out_f = w.shape()[0];
  const std::size_t in_f = w.shape()[1];
  if (xs.empty() || xs.back() != in_f) {
    throw Error(ErrorCode::kDimensionMismatch, "linear: input " + shape_string(xs) +
                                                   " vs weight " + shape_string(w.shape()));
  }
  if (b.valid() && b.numel() != out_f) {
    throw Error(ErrorCode::kDimensionMismatch, "linear: bias size mismatch");
  }
  const std::size_t rows = x.numel() / in_f;
  Shape ys = xs;
  ys.back() = out_f;
  Tensor y(ys);
  Map Y(y.data.data(), rows, out_f);
  MapC X(x.value().data.data(), rows, in_f);
  MapC W(w.value().data.data(), out_f, in_f);
  Y.noalias() = X * W.transpose();
  if (b.valid()) {
    Eigen::Map<const Eigen::RowVectorXd> B(b.value().data.data(), out_f);
    Y.rowwise() += B;
  }
  g->add_flops(2.0 * rows * in_f * out_f + (b.valid() ? static_cast<double>(rows * out_f) : 0.0));
  const int xi = x.id, wi = w.id, bi = b.id;
  const bool nx = ng(x), nw = ng(w), nb = ng(b);
  return g->make(std::move(y), nx || nw || nb,
                 [g, xi, wi, bi, nx, nw, nb, rows, in_f, out_f](const Tensor&, const Dy& dy) {
                   MapC DY(dy.data(), rows, out_f);
                   if (nx) {
                     Map DX(g->grad(xi).data(), rows, in_f);
                     DX.noalias() += DY * MapC(g->value({g, wi}).data.data(), out_f, in_f);
                   }
                   if (nw) {
                     Map DW(g->grad(wi).data(), out_f, in_f);
                     DW.noalias() += DY.transpose() * MapC(g->value({g, xi}).data.data(), rows, in_f);
                   }
                   if (nb) {
                     Eigen::Map<Eigen::RowVectorXd> DB(g->grad(bi).data(), out_f);
                     DB += DY.colwise().sum();
                   }
                 });
}

Var conv2d(Var x, Var w, Var b, std::size_t groups) {
  require_same_graph(x, w);
  require_rank(x, 4, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  Graph* g = x.g;
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  kernels::Conv2dShape s;
  s.batch = xs[0];
  s.in_channels = xs[1];
  s.height = xs[2];
  s.width = xs[3];
  s.out_channels = ws[0];
  s.kernel_h = ws[2];
  s.kernel_w = ws[3];
  s.groups = groups;
  if (groups == 0 || s.in_channels % groups != 0 || s.out_channels % groups != 0 ||
      ws[1] != s.in_channels / groups || s.kernel_h % 2 == 0 || s.kernel_w % 2 == 0) {
    throw Error(ErrorCode::kConfigError, "conv2d: input " + shape_string(xs) + ", weight " +
                                             shape_string(ws) + ", groups " +
                                             std::to_string(groups));
  }
  if (b.valid() && b.numel() != s.out_channels) {
    throw Error(ErrorCode::kDimensionMismatch, "conv2d: bias size mismatch");
  }
  Tensor y({s.batch, s.out_channels, s.height, s.width});
  std::span<const double> bias;
  if (b.valid()) bias = b.value().data;
  kernels::conv2d_forward(s, x.value().data, w.value().data, bias, y.data);
  const double outputs = static_cast<double>(y.numel());
  g->add_flops(2.0 * outputs * s.in_per_group() * s.kernel_h * s.kernel_w +
               (b.valid() ? outputs : 0.0));
  const int xi = x.id, wi = w.id, bi = b.id;
  const bool nx = ng(x), nw = ng(w), nb = ng(b);
  return g->make(std::move(y), nx || nw || nb, [g, s, xi, wi, bi, nx, nw, nb](const Tensor&, const Dy& dy) {
    if (nx) kernels::conv2d_backward_input(s, dy, g->value({g, wi}).data, g->grad(xi));
    if (nw || nb) {
      std::vector<double> scratch_w;
      std::span<double> dw;
      if (nw) {
        dw = g->grad(wi);
      } else {
        scratch_w.assign(s.weight_size(), 0.0);
        dw = scratch_w;
      }
      std::span<double> db;
      if (nb) db = g->grad(bi);
      kernels::conv2d_backward_weight(s, g->value({g, xi}).data, dy, dw, db);
    }
  });
}

Var batchnorm2d(Var x, Var gamma, Var beta, Parameter& running_mean, Parameter& running_var,
                double momentum, double eps) {
  require_rank(x, 4, "batchnorm2d");
  Graph* g = x.g;
  const Shape& xs = x.shape();
  const std::size_t B = xs[0], C = xs[1], HW = xs[2] * xs[3];
  if (gamma.numel() != C || beta.numel() != C || running_mean.numel() != C ||
      running_var.numel() != C) {
    throw Error(ErrorCode::kDimensionMismatch, "batchnorm2d: channel count mismatch");
  }
  const double n = static_cast<double>(B * HW);
  const auto& xd = x.value().data;
  const bool train = g->training();
  std::vector<double> mean(C), inv_std(C);
  for (std::size_t c = 0; c < C; ++c) {
    if (train) {
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < HW; ++i) s += xd[(b * C + c) * HW + i];
      const double m = s / n;
      double v = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < HW; ++i) {
          const double d = xd[(b * C + c) * HW + i] - m;
          v += d * d;
        }
      v /= n;
      mean[c] = m;
      inv_std[c] = 1.0 / std::sqrt(v + eps);
      running_mean.value.data[c] = (1.0 - momentum) * running_mean.value.data[c] + momentum * m;
      const double unbiased = n > 1.0 ? v * n / (n - 1.0) : v;
      running_var.value.data[c] = (1.0 - momentum) * running_var.value.data[c] + momentum * unbiased;
    } else {
      mean[c] = running_mean.value.data[c];
      inv_std[c] = 1.0 / std::sqrt(running_var.value.data[c] + eps);
    }
  }
  Tensor xhat(xs), y(xs);
  const auto& gd = gamma.value().data;
  const auto& bd = beta.value().data;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < HW; ++i) {
        const std::size_t k = (b * C + c) * HW + i;
        xhat.data[k] = (xd[k] - mean[c]) * inv_std[c];
        y.data[k] = gd[c] * xhat.data[k] + bd[c];
      }
  g->add_flops(2.0 * static_cast<double>(y.numel()));
  const int xi = x.id, gi = gamma.id, bi = beta.id;
  const bool nx = ng(x), ngm = ng(gamma), nb = ng(beta);
  return g->make(std::move(y), nx || ngm || nb,
                 [g, xi, gi, bi, nx, ngm, nb, B, C, HW, n, train, inv_std = std::move(inv_std),
                  xhat = std::move(xhat.data)](const Tensor&, const Dy& dy) {
                   const auto& gd = g->value({g, gi}).data;
                   for (std::size_t c = 0; c < C; ++c) {
                     double sum_dy = 0.0, sum_dy_xhat = 0.0;
                     for (std::size_t b = 0; b < B; ++b)
                       for (std::size_t i = 0; i < HW; ++i) {
                         const std::size_t k = (b * C + c) * HW + i;
                         sum_dy += dy[k];
                         sum_dy_xhat += dy[k] * xhat[k];
                       }
                     if (ngm) g->grad(gi)[c] += sum_dy_xhat;
                     if (nb) g->grad(bi)[c] += sum_dy;
                     if (!nx) continue;
                     auto& dx = g->grad(xi);
                     const double k0 = gd[c] * inv_std[c];
                     for (std::size_t b = 0; b < B; ++b)
                       for (std::size_t i = 0; i < HW; ++i) {
                         const std::size_t k = (b * C + c) * HW + i;
                         if (train) {
                           dx[k] += k0 * (dy[k] - sum_dy / n - xhat[k] * sum_dy_xhat / n);
                         } else {
                           dx[k] += k0 * dy[k];
                         }
                       }
                   }
                 });
}

Var layernorm(Var x, Var gamma, Var beta, double eps) {
  Graph* g = x.g;
  const Shape& xs = x.shape();
  const std::size_t D = xs.back();
  const std::size_t rows = x.numel() / D;
  if (gamma.numel() != D || beta.numel() != D) {
    throw Error(ErrorCode::kDimensionMismatch, "layernorm: feature size mismatch");
  }
  const auto& xd = x.value().data;
  const auto& gd = gamma.value().data;
  const auto& bd = beta.value().data;
  Tensor y(xs);
  std::vector<double> xhat(x.numel()), inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xd.data() + r * D;
    double m = 0.0;
    for (std::size_t j = 0; j < D; ++j) m += row[j];
    m /= static_cast<double>(D);
    double v = 0.0;
    for (std::size_t j = 0; j < D; ++j) v += (row[j] - m) * (row[j] - m);
    v /= static_cast<double>(D);
    inv_std[r] = 1.0 / std::sqrt(v + eps);
    for (std::size_t j = 0; j < D; ++j) {
      xhat[r * D + j] = (row[j] - m) * inv_std[r];
      y.data[r * D + j] = gd[j] * xhat[r * D + j] + bd[j];
    }
  }
  g->add_flops(5.0 * static_cast<double>(y.numel()));
  const int xi = x.id, gi = gamma.id, bi = beta.id;
  const bool nx = ng(x), ngm = ng(gamma), nb = ng(beta);
  return g->make(std::move(y), nx || ngm || nb,
                 [g, xi, gi, bi, nx, ngm, nb, rows, D, inv_std = std::move(inv_std),
                  xhat = std::move(xhat)](const Tensor&, const Dy& dy) {
                   const auto& gd = g->value({g, gi}).data;
                   if (ngm || nb) {
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t j = 0; j < D; ++j) {
                         if (ngm) g->grad(gi)[j] += dy[r * D + j] * xhat[r * D + j];
                         if (nb) g->grad(bi)[j] += dy[r * D + j];
                       }
                   }
                   if (!nx) return;
                   auto& dx = g->grad(xi);
                   const double inv_d = 1.0 / static_cast<double>(D);
                   for (std::size_t r = 0; r < rows; ++r) {
                     double s1 = 0.0, s2 = 0.0;
                     for (std::size_t j = 0; j < D; ++j) {
                       const double dxh = dy[r * D + j] * gd[j];
                       s1 += dxh;
                       s2 += dxh * xhat[r * D + j];
                     }
                     for (std::size_t j = 0; j < D; ++j) {
                       const double dxh = dy[r * D + j] * gd[j];
                       dx[r * D + j] += inv_std[r] * (dxh - s1 * inv_d - xhat[r * D + j] * s2 * inv_d);
                     }
                   }
                 });
}

Var softmax_last(Var x) {
  Graph* g = x.g;
  const std::size_t D = x.shape().back();
  const std::size_t rows = x.numel() / D;
  Tensor y = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = y.data.data() + r * D;
    const double mx = *std::max_element(row, row + D);
    double s = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      row[j] = std::exp(row[j] - mx);
      s += row[j];
    }
    for (std::size_t j = 0; j < D; ++j) row[j] /= s;
  }
  g->add_flops(3.0 * static_cast<double>(y.numel()));
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, rows, D](const Tensor& out, const Dy& dy) {
    const auto& yd = out.data;
    auto& dx = g->grad(xi);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < D; ++j) dot += dy[r * D + j] * yd[r * D + j];
      for (std::size_t j = 0; j < D; ++j) dx[r * D + j] += yd[r * D + j] * (dy[r * D + j] - dot);
    }
  });
}

Var bmm(Var a, Var b, bool transpose_b) {
  require_same_graph(a, b);
  require_rank(a, 3, "bmm lhs");
  require_rank(b, 3, "bmm rhs");
  Graph* g = a.g;
  const std::size_t B = a.shape()[0], M = a.shape()[1], K = a.shape()[2];
  const std::size_t N = transpose_b ? b.shape()[1] : b.shape()[2];
  const std::size_t Kb = transpose_b ? b.shape()[2] : b.shape()[1];
  if (b.shape()[0] != B || Kb != K) {
    throw Error(ErrorCode::kDimensionMismatch,
                "bmm: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor y({B, M, N});
  const auto& ad = a.value().data;
  const auto& bd = b.value().data;
  for (std::size_t i = 0; i < B; ++i) {
    MapC A(ad.data() + i * M * K, M, K);
    Map Y(y.data.data() + i * M * N, M, N);
    if (transpose_b) {
      Y.noalias() = A * MapC(bd.data() + i * N * K, N, K).transpose();
    } else {
      Y.noalias() = A * MapC(bd.data() + i * K * N, K, N);
    }
  }
  g->add_flops(2.0 * B * M * N * K);
  const int ai = a.id, bi = b.id;
  const bool na = ng(a), nb = ng(b);
  return g->make(std::move(y), na || nb,
                 [g, ai, bi, na, nb, B, M, N, K, transpose_b](const Tensor&, const Dy& dy) {
                   const auto& ad = g->value({g, ai}).data;
                   const auto& bd = g->value({g, bi}).data;
                   for (std::size_t i = 0; i < B; ++i) {
                     MapC DY(dy.data() + i * M * N, M, N);
                     if (na) {
                       Map DA(g->grad(ai).data() + i * M * K, M, K);
                       if (transpose_b) {
                         DA.noalias() += DY * MapC(bd.data() + i * N * K, N, K);
                       } else {
                         DA.noalias() += DY * MapC(bd.data() + i * K * N, K, N).transpose();
                       }
                     }
                     if (nb) {
                       MapC A(ad.data() + i * M * K, M, K);
                       if (transpose_b) {
                         Map DB(g->grad(bi).data() + i * N * K, N, K);
                         DB.noalias() += DY.transpose() * A;
                       } else {
                         Map DB(g->grad(bi).data() + i * K * N, K, N);
                         DB.noalias() += A.transpose() * DY;
                       }
                     }
                   }
                 });
}

Var permute(Var x, const std::vector<std::size_t>& perm) {
  Graph* g = x.g;
  const Shape& xs = x.shape();
  const std::size_t r = xs.size();
  if (perm.size() != r) throw Error(ErrorCode::kDimensionMismatch, "permute: rank mismatch");
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) throw Error(ErrorCode::kConfigError, "permute: invalid permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * xs[i];
  Shape ys(r);
  std::vector<std::size_t> stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    ys[i] = xs[perm[i]];
    stride[i] = in_stride[perm[i]];
  }
  const std::size_t n = x.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t offset = 0;
  for (std::size_t o = 0; o < n; ++o) {
    src[o] = offset;
    for (std::size_t d = r; d-- > 0;) {
      ++idx[d];
      offset += stride[d];
      if (idx[d] < ys[d]) break;
      offset -= stride[d] * ys[d];
      idx[d] = 0;
    }
  }
  Tensor y(ys);
  const auto& xd = x.value().data;
  for (std::size_t o = 0; o < n; ++o) y.data[o] = xd[src[o]];
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, src = std::move(src)](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    for (std::size_t o = 0; o < dy.size(); ++o) dx[src[o]] += dy[o];
  });
}

Var reshape(Var x, Shape shape) {
  Graph* g = x.g;
  if (shape_numel(shape) != x.numel()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "reshape " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  Tensor y(std::move(shape), x.value().data);
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var dropout(Var x, double p) {
  Graph* g = x.g;
  if (!g->training() || p <= 0.0) return x;
  if (p >= 1.0) throw Error(ErrorCode::kConfigError, "dropout probability must be < 1");
  std::vector<double> mask(x.numel());
  const double keep = 1.0 / (1.0 - p);
  for (auto& m : mask) m = uniform01(g->rng()) < p ? 0.0 : keep;
  Tensor y = x.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] *= mask[i];
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, mask = std::move(mask)](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

Var global_avg_pool(Var x) {
  require_rank(x, 4, "global_avg_pool");
  Graph* g = x.g;
  const std::size_t B = x.shape()[0], C = x.shape()[1], HW = x.shape()[2] * x.shape()[3];
  Tensor y({B, C});
  const auto& xd = x.value().data;
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    double s = 0.0;
    for (std::size_t i = 0; i < HW; ++i) s += xd[bc * HW + i];
    y.data[bc] = s / static_cast<double>(HW);
  }
  g->add_flops(static_cast<double>(x.numel()));
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, B, C, HW](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    const double inv = 1.0 / static_cast<double>(HW);
    for (std::size_t bc = 0; bc < B * C; ++bc)
      for (std::size_t i = 0; i < HW; ++i) dx[bc * HW + i] += dy[bc] * inv;
  });
}

Var channel_scale(Var x, Var s) {
  require_same_graph(x, s);
  require_rank(x, 4, "channel_scale");
  Graph* g = x.g;
  const std::size_t B = x.shape()[0], C = x.shape()[1], HW = x.shape()[2] * x.shape()[3];
  if (s.shape() != Shape{B, C}) {
    throw Error(ErrorCode::kDimensionMismatch, "channel_scale: gate shape mismatch");
  }
  Tensor y = x.value();
  const auto& sd = s.value().data;
  for (std::size_t bc = 0; bc < B * C; ++bc)
    for (std::size_t i = 0; i < HW; ++i) y.data[bc * HW + i] *= sd[bc];
  g->add_flops(static_cast<double>(y.numel()));
  const int xi = x.id, si = s.id;
  const bool nx = ng(x), ns = ng(s);
  return g->make(std::move(y), nx || ns, [g, xi, si, nx, ns, B, C, HW](const Tensor&, const Dy& dy) {
    const auto& xd = g->value({g, xi}).data;
    const auto& sd = g->value({g, si}).data;
    for (std::size_t bc = 0; bc < B * C; ++bc) {
      if (ns) {
        double acc = 0.0;
        for (std::size_t i = 0; i < HW; ++i) acc += dy[bc * HW + i] * xd[bc * HW + i];
        g->grad(si)[bc] += acc;
      }
      if (nx) {
        auto& dx = g->grad(xi);
        for (std::size_t i = 0; i < HW; ++i) dx[bc * HW + i] += dy[bc * HW + i] * sd[bc];
      }
    }
  });
}

Var take_axis2(Var x, const std::vector<std::size_t>& index) {
  require_rank(x, 4, "take_axis2");
  Graph* g = x.g;
  const std::size_t B = x.shape()[0], C = x.shape()[1], T = x.shape()[2], N = x.shape()[3];
  for (auto t : index)
    if (t >= T) throw Error(ErrorCode::kDimensionMismatch, "take_axis2: index out of range");
  const std::size_t P = index.size();
  Tensor y({B, C, P, N});
  const auto& xd = x.value().data;
  for (std::size_t bc = 0; bc < B * C; ++bc)
    for (std::size_t i = 0; i < P; ++i)
      for (std::size_t n = 0; n < N; ++n) y.data[(bc * P + i) * N + n] = xd[(bc * T + index[i]) * N + n];
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, B, C, T, N, index](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    const std::size_t P = index.size();
    for (std::size_t bc = 0; bc < B * C; ++bc)
      for (std::size_t i = 0; i < P; ++i)
        for (std::size_t n = 0; n < N; ++n) dx[(bc * T + index[i]) * N + n] += dy[(bc * P + i) * N + n];
  });
}

Var slice_last(Var x, std::size_t begin, std::size_t count) {
  Graph* g = x.g;
  const std::size_t D = x.shape().back();
  if (begin + count > D) throw Error(ErrorCode::kDimensionMismatch, "slice_last: out of range");
  const std::size_t rows = x.numel() / D;
  Shape ys = x.shape();
  ys.back() = count;
  Tensor y(ys);
  const auto& xd = x.value().data;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < count; ++j) y.data[r * count + j] = xd[r * D + begin + j];
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, rows, D, begin, count](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < count; ++j) dx[r * D + begin + j] += dy[r * count + j];
  });
}

Var select_axis1(Var x, std::size_t t) {
  require_rank(x, 3, "select_axis1");
  Graph* g = x.g;
  const std::size_t B = x.shape()[0], T = x.shape()[1], F = x.shape()[2];
  if (t >= T) throw Error(ErrorCode::kDimensionMismatch, "select_axis1: index out of range");
  Tensor y({B, F});
  const auto& xd = x.value().data;
  for (std::size_t b = 0; b < B; ++b)
    std::copy_n(xd.begin() + static_cast<long>((b * T + t) * F), F,
                y.data.begin() + static_cast<long>(b * F));
  const int xi = x.id;
  return g->make(std::move(y), ng(x), [g, xi, B, T, F, t](const Tensor&, const Dy& dy) {
    auto& dx = g->grad(xi);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t f = 0; f < F; ++f) dx[(b * T + t) * F + f] += dy[b * F + f];
  });
}

Var nmse_loss(Var pred, Var target, std::size_t groups) {
  require_same_shape(pred, target, "nmse_loss");
  Graph* g = pred.g;
  const std::size_t n = pred.numel();
  if (groups == 0 || n % groups != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "nmse_loss: batch does not split into groups");
  }
  const std::size_t chunk = n / groups;
  const auto& pd = pred.value().data;
  const auto& td = target.value().data;
  std::vector<double> den(groups);
  double loss = 0.0;
  for (std::size_t s = 0; s < groups; ++s) {
    double num = 0.0, d = 0.0;
    for (std::size_t i = s * chunk; i < (s + 1) * chunk; ++i) {
      num += (pd[i] - td[i]) * (pd[i] - td[i]);
      d += td[i] * td[i];
    }
    if (!(d > 0.0)) throw Error(ErrorCode::kZeroTarget, "target sample has zero energy");
    den[s] = d;
    loss += num / d;
  }
  loss /= static_cast<double>(groups);
  const int pi = pred.id, ti = target.id;
  return g->make(Tensor({1}, {loss}), ng(pred),
                 [g, pi, ti, groups, chunk, den = std::move(den)](const Tensor&, const Dy& dy) {
                   const auto& pd = g->value({g, pi}).data;
                   const auto& td = g->value({g, ti}).data;
                   auto& dp = g->grad(pi);
                   for (std::size_t s = 0; s < groups; ++s) {
                     const double k = 2.0 * dy[0] / (den[s] * static_cast<double>(groups));
                     for (std::size_t i = s * chunk; i < (s + 1) * chunk; ++i) {
                       dp[i] += k * (pd[i] - td[i]);
                     }
                   }
                 });
}

}  // namespace csi4cast::nn
