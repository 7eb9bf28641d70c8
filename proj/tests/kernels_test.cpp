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

#include <omp.h>

#include <complex>
#include <random>
#include <vector>

#include "csi4cast/kernels.hpp"
#include "test_util.hpp"

namespace k = csi4cast::kernels;

namespace {

std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

struct ConvCase {
  k::Conv2dShape s;
  bool bias;
};

std::vector<ConvCase> conv_cases() {
  return {
      {{1, 1, 1, 1, 1, 1, 1, 1}, true},   {{2, 2, 4, 5, 7, 3, 3, 1}, true},
      {{3, 8, 8, 4, 6, 3, 3, 8}, false},  {{2, 8, 4, 3, 5, 1, 1, 4}, true},
      {{1, 4, 6, 6, 2, 5, 3, 2}, true},   {{4, 2, 2, 16, 8, 3, 1, 1}, false},
  };
}

// Direct evaluation of one output element.
double conv_at(const k::Conv2dShape& s, const std::vector<double>& x, const std::vector<double>& w,
               const std::vector<double>& b, std::size_t n, std::size_t o, std::size_t i,
               std::size_t j) {
  const std::size_t g = o / s.out_per_group();
  double acc = b.empty() ? 0.0 : b[o];
  const long ph = static_cast<long>(s.kernel_h / 2), pw = static_cast<long>(s.kernel_w / 2);
  for (std::size_t c = 0; c < s.in_per_group(); ++c) {
    const std::size_t ci = g * s.in_per_group() + c;
    for (std::size_t u = 0; u < s.kernel_h; ++u)
      for (std::size_t v = 0; v < s.kernel_w; ++v) {
        const long ii = static_cast<long>(i + u) - ph, jj = static_cast<long>(j + v) - pw;
        if (ii < 0 || jj < 0 || ii >= static_cast<long>(s.height) || jj >= static_cast<long>(s.width))
          continue;
        acc += w[((o * s.in_per_group() + c) * s.kernel_h + u) * s.kernel_w + v] *
               x[((n * s.in_channels + ci) * s.height + ii) * s.width + jj];
      }
  }
  return acc;
}

}  // namespace

TEST(Conv2dKernel, ReferenceMatchesDirectSum) {
  for (const auto& c : conv_cases()) {
    const auto& s = c.s;
    const auto x = uniform(s.input_size(), 1), w = uniform(s.weight_size(), 2);
    const auto b = c.bias ? uniform(s.out_channels, 3) : std::vector<double>{};
    std::vector<double> y(s.output_size());
    k::reference::conv2d_forward(s, x, w, b, y);
    for (std::size_t n = 0; n < s.batch; ++n)
      for (std::size_t o = 0; o < s.out_channels; ++o)
        for (std::size_t i = 0; i < s.height; ++i)
          for (std::size_t j = 0; j < s.width; ++j)
            EXPECT_NEAR(y[((n * s.out_channels + o) * s.height + i) * s.width + j],
                        conv_at(s, x, w, b, n, o, i, j), 1e-12);
  }
}

TEST(Conv2dKernel, ParallelMatchesReference) {
  omp_set_num_threads(4);
  for (const auto& c : conv_cases()) {
    const auto& s = c.s;
    const auto x = uniform(s.input_size(), 4), w = uniform(s.weight_size(), 5);
    const auto b = c.bias ? uniform(s.out_channels, 6) : std::vector<double>{};
    const auto dy = uniform(s.output_size(), 7);

    std::vector<double> y1(s.output_size()), y2(s.output_size());
    k::conv2d_forward(s, x, w, b, y1);
    k::reference::conv2d_forward(s, x, w, b, y2);
    for (std::size_t i = 0; i < y1.size(); ++i) EXPECT_NEAR(y1[i], y2[i], 1e-12);

    std::vector<double> dx1(s.input_size(), 0.5), dx2(s.input_size(), 0.5);
    k::conv2d_backward_input(s, dy, w, dx1);
    k::reference::conv2d_backward_input(s, dy, w, dx2);
    for (std::size_t i = 0; i < dx1.size(); ++i) EXPECT_NEAR(dx1[i], dx2[i], 1e-12);

    std::vector<double> dw1(s.weight_size(), 0.25), dw2(s.weight_size(), 0.25);
    std::vector<double> db1(c.bias ? s.out_channels : 0), db2(db1.size());
    k::conv2d_backward_weight(s, x, dy, dw1, db1);
    k::reference::conv2d_backward_weight(s, x, dy, dw2, db2);
    for (std::size_t i = 0; i < dw1.size(); ++i) EXPECT_NEAR(dw1[i], dw2[i], 1e-12);
    for (std::size_t i = 0; i < db1.size(); ++i) EXPECT_NEAR(db1[i], db2[i], 1e-12);
  }
}

TEST(Conv2dKernel, BackwardIsAdjointOfForward) {
  // <conv(x), dy> == <x, conv^T(dy)> and == <w, dW(x, dy)>.
  for (const auto& c : conv_cases()) {
    const auto& s = c.s;
    const auto x = uniform(s.input_size(), 8), w = uniform(s.weight_size(), 9);
    const auto dy = uniform(s.output_size(), 10);
    std::vector<double> y(s.output_size()), dx(s.input_size(), 0.0), dw(s.weight_size(), 0.0);
    k::reference::conv2d_forward(s, x, w, {}, y);
    k::reference::conv2d_backward_input(s, dy, w, dx);
    k::reference::conv2d_backward_weight(s, x, dy, dw, {});
    double lhs = 0, rx = 0, rw = 0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += y[i] * dy[i];
    for (std::size_t i = 0; i < x.size(); ++i) rx += x[i] * dx[i];
    for (std::size_t i = 0; i < w.size(); ++i) rw += w[i] * dw[i];
    EXPECT_NEAR(lhs, rx, 1e-10);
    EXPECT_NEAR(lhs, rw, 1e-10);
  }
}

TEST(TdlKernel, ParallelMatchesReference) {
  omp_set_num_threads(4);
  const std::size_t M = 4, P = 7, T = 9, K = 13;
  const auto re = uniform(M * P, 1), im = uniform(M * P, 2);
  std::vector<std::complex<double>> gain(M * P);
  for (std::size_t i = 0; i < gain.size(); ++i) gain[i] = {re[i], im[i]};
  auto doppler = uniform(P, 3), delay = uniform(P, 4), times = uniform(T, 5);
  for (auto& d : doppler) d *= 200.0;
  for (auto& d : delay) d = (d + 1.0) * 200e-9;
  std::vector<double> freqs(K);
  for (std::size_t i = 0; i < K; ++i) freqs[i] = 30e3 * static_cast<double>(i);
  const k::TdlGrid g{M, P, gain, doppler, delay, times, freqs};
  std::vector<std::complex<double>> a(M * T * K), b(M * T * K);
  k::tdl_synthesize(g, a);
  k::reference::tdl_synthesize(g, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
}
