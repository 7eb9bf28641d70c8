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

#include "csi4cast/predictor.hpp"

namespace csi4cast {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kCsi4Cast: return "csi4cast";
    case ModelKind::kRnn: return "rnn";
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kNp: return "np";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::kCsi4Cast, ModelKind::kRnn, ModelKind::kCnn, ModelKind::kNp}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::kConfigError, "unknown model kind '" + std::string(s) + "'");
}

nn::Tensor real_stack(const std::vector<cdouble>& x, std::size_t rows, std::size_t cols) {
  if (x.size() != rows * cols) throw Error(ErrorCode::kDimensionMismatch, "real_stack size");
  nn::Tensor out({2, rows, cols});
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.data[i] = x[i].real();
    out.data[x.size() + i] = x[i].imag();
  }
  return out;
}

std::vector<cdouble> complex_restack(const nn::Tensor& x) {
  if (x.rank() != 3 || x.dim(0) != 2) {
    throw Error(ErrorCode::kDimensionMismatch, "complex_restack expects [2, T, N]");
  }
  const std::size_t n = x.numel() / 2;
  std::vector<cdouble> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {x.data[i], x.data[n + i]};
  return out;
}

nn::Tensor stack_sequences(const std::vector<const CsiSequence*>& seqs) {
  if (seqs.empty()) throw Error(ErrorCode::kDimensionMismatch, "empty batch");
  const std::size_t M = seqs[0]->n_tx(), T = seqs[0]->len(), N = seqs[0]->n_sc();
  nn::Tensor out({seqs.size() * M, 2, T, N});
  const std::size_t plane = T * N;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const CsiSequence& q = *seqs[s];
    if (q.n_tx() != M || q.len() != T || q.n_sc() != N) {
      throw Error(ErrorCode::kDimensionMismatch, "batch sequences differ in shape");
    }
    for (std::size_t m = 0; m < M; ++m) {
      double* re = out.data.data() + ((s * M + m) * 2) * plane;
      double* im = re + plane;
      const cdouble* src = q.data().data() + m * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        re[i] = src[i].real();
        im[i] = src[i].imag();
      }
    }
  }
  return out;
}

std::vector<CsiSequence> unstack_sequences(const nn::Tensor& x, std::size_t n_tx) {
  if (x.rank() != 4 || x.dim(1) != 2 || n_tx == 0 || x.dim(0) % n_tx != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "unstack expects [S * n_tx, 2, P, N]");
  }
  const std::size_t S = x.dim(0) / n_tx, P = x.dim(2), N = x.dim(3);
  const std::size_t plane = P * N;
  std::vector<CsiSequence> out;
  out.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    CsiSequence q(n_tx, P, N);
    for (std::size_t m = 0; m < n_tx; ++m) {
      const double* re = x.data.data() + ((s * n_tx + m) * 2) * plane;
      const double* im = re + plane;
      for (std::size_t i = 0; i < plane; ++i) q.data()[m * plane + i] = {re[i], im[i]};
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<CsiSequence> Predictor::predict(const std::vector<const CsiSequence*>& histories) const {
  const SystemConfig& sys = system();
  for (const auto* h : histories) require_shapes(*h, sys, sys.hist_len);
  nn::Graph g(false);
  nn::Var y = forward(g, g.input(stack_sequences(histories)));
  auto out = unstack_sequences(y.value(), sys.n_tx);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& ts = histories[i]->timestamps();
    const double t0 = ts.empty() ? static_cast<double>(sys.hist_len) * sys.report_interval
                                 : ts.back() + sys.report_interval;
    out[i].set_uniform_timestamps(t0, sys.report_interval);
  }
  return out;
}

CsiSequence Predictor::predict(const CsiSequence& history) const {
  return std::move(predict(std::vector<const CsiSequence*>{&history}).front());
}

}  // namespace csi4cast
