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

#include "csi4cast/kernels.hpp"

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <numbers>
#include <vector>

namespace csi4cast::kernels {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatMap = Eigen::Map<RowMat>;
using ConstRowMatMap = Eigen::Map<const RowMat>;

bool is_pointwise(const Conv2dShape& s) { return s.kernel_h == 1 && s.kernel_w == 1; }

// col[(ci*kh + ky)*kw + kx][y*W + x] = in[ci][y + ky - ph][x + kx - pw], zero outside.
void im2col(const Conv2dShape& s, const double* in, double* col) {
  const std::size_t H = s.height, W = s.width;
  const long ph = static_cast<long>(s.kernel_h / 2), pw = static_cast<long>(s.kernel_w / 2);
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < s.in_per_group(); ++ci) {
    const double* plane = in + ci * H * W;
    for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < s.kernel_w; ++kx, ++row) {
        double* dst = col + row * H * W;
        const long dy = static_cast<long>(ky) - ph, dx = static_cast<long>(kx) - pw;
        for (std::size_t y = 0; y < H; ++y) {
          const long sy = static_cast<long>(y) + dy;
          if (sy < 0 || sy >= static_cast<long>(H)) {
            for (std::size_t x = 0; x < W; ++x) dst[y * W + x] = 0.0;
            continue;
          }
          for (std::size_t x = 0; x < W; ++x) {
            const long sx = static_cast<long>(x) + dx;
            dst[y * W + x] = (sx < 0 || sx >= static_cast<long>(W)) ? 0.0 : plane[sy * W + sx];
          }
        }
      }
    }
  }
}

void col2im_add(const Conv2dShape& s, const double* col, double* in) {
  const std::size_t H = s.height, W = s.width;
  const long ph = static_cast<long>(s.kernel_h / 2), pw = static_cast<long>(s.kernel_w / 2);
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < s.in_per_group(); ++ci) {
    double* plane = in + ci * H * W;
    for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < s.kernel_w; ++kx, ++row) {
        const double* src = col + row * H * W;
        const long dy = static_cast<long>(ky) - ph, dx = static_cast<long>(kx) - pw;
        for (std::size_t y = 0; y < H; ++y) {
          const long sy = static_cast<long>(y) + dy;
          if (sy < 0 || sy >= static_cast<long>(H)) continue;
          for (std::size_t x = 0; x < W; ++x) {
            const long sx = static_cast<long>(x) + dx;
            if (sx >= 0 && sx < static_cast<long>(W)) plane[sy * W + sx] += src[y * W + x];
          }
        }
      }
    }
  }
}

}  // namespace

void conv2d_forward(const Conv2dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y) {
  assert(s.kernel_h % 2 == 1 && s.kernel_w % 2 == 1);
  const std::size_t HW = s.height * s.width;
  const std::size_t K = s.in_per_group() * s.kernel_h * s.kernel_w;
  const std::size_t cog = s.out_per_group(), cig = s.in_per_group();
  const long n_jobs = static_cast<long>(s.batch * s.groups);

#pragma omp parallel
  {
    std::vector<double> col(is_pointwise(s) ? 0 : K * HW);
#pragma omp for schedule(static)
    for (long job = 0; job < n_jobs; ++job) {
      const std::size_t b = static_cast<std::size_t>(job) / s.groups;
      const std::size_t g = static_cast<std::size_t>(job) % s.groups;
      const double* in = x.data() + (b * s.in_channels + g * cig) * HW;
      ConstRowMatMap wg(w.data() + g * cog * K, static_cast<long>(cog), static_cast<long>(K));
      RowMatMap out(y.data() + (b * s.out_channels + g * cog) * HW, static_cast<long>(cog),
                    static_cast<long>(HW));
      if (is_pointwise(s)) {
        out.noalias() = wg * ConstRowMatMap(in, static_cast<long>(K), static_cast<long>(HW));
      } else {
        im2col(s, in, col.data());
        out.noalias() = wg * ConstRowMatMap(col.data(), static_cast<long>(K), static_cast<long>(HW));
      }
      if (!bias.empty()) {
        for (std::size_t o = 0; o < cog; ++o) out.row(static_cast<long>(o)).array() += bias[g * cog + o];
      }
    }
  }
}

void conv2d_backward_input(const Conv2dShape& s, std::span<const double> dy,
                           std::span<const double> w, std::span<double> dx) {
  const std::size_t HW = s.height * s.width;
  const std::size_t K = s.in_per_group() * s.kernel_h * s.kernel_w;
  const std::size_t cog = s.out_per_group(), cig = s.in_per_group();
  const long n_jobs = static_cast<long>(s.batch * s.groups);

#pragma omp parallel
  {
    std::vector<double> col(is_pointwise(s) ? 0 : K * HW);
#pragma omp for schedule(static)
    for (long job = 0; job < n_jobs; ++job) {
      const std::size_t b = static_cast<std::size_t>(job) / s.groups;
      const std::size_t g = static_cast<std::size_t>(job) % s.groups;
      ConstRowMatMap wg(w.data() + g * cog * K, static_cast<long>(cog), static_cast<long>(K));
      ConstRowMatMap dout(dy.data() + (b * s.out_channels + g * cog) * HW, static_cast<long>(cog),
                          static_cast<long>(HW));
      double* din = dx.data() + (b * s.in_channels + g * cig) * HW;
      if (is_pointwise(s)) {
        RowMatMap(din, static_cast<long>(K), static_cast<long>(HW)).noalias() += wg.transpose() * dout;
      } else {
        RowMatMap dcol(col.data(), static_cast<long>(K), static_cast<long>(HW));
        dcol.noalias() = wg.transpose() * dout;
        col2im_add(s, col.data(), din);
      }
    }
  }
}

void conv2d_backward_weight(const Conv2dShape& s, std::span<const double> x,
                            std::span<const double> dy, std::span<double> dw,
                            std::span<double> dbias) {
  const std::size_t HW = s.height * s.width;
  const std::size_t K = s.in_per_group() * s.kernel_h * s.kernel_w;
  const std::size_t cog = s.out_per_group(), cig = s.in_per_group();
  const long n_groups = static_cast<long>(s.groups);

#pragma omp parallel
  {
    std::vector<double> col(is_pointwise(s) ? 0 : K * HW);
#pragma omp for schedule(static)
    for (long gl = 0; gl < n_groups; ++gl) {
      const std::size_t g = static_cast<std::size_t>(gl);
      RowMatMap dwg(dw.data() + g * cog * K, static_cast<long>(cog), static_cast<long>(K));
      for (std::size_t b = 0; b < s.batch; ++b) {
        const double* in = x.data() + (b * s.in_channels + g * cig) * HW;
        ConstRowMatMap dout(dy.data() + (b * s.out_channels + g * cog) * HW,
                            static_cast<long>(cog), static_cast<long>(HW));
        if (is_pointwise(s)) {
          dwg.noalias() += dout * ConstRowMatMap(in, static_cast<long>(K), static_cast<long>(HW)).transpose();
        } else {
          im2col(s, in, col.data());
          dwg.noalias() +=
              dout * ConstRowMatMap(col.data(), static_cast<long>(K), static_cast<long>(HW)).transpose();
        }
        if (!dbias.empty()) {
          for (std::size_t o = 0; o < cog; ++o) dbias[g * cog + o] += dout.row(static_cast<long>(o)).sum();
        }
      }
    }
  }
}

void tdl_synthesize(const TdlGrid& grid, std::span<std::complex<double>> out) {
  using cd = std::complex<double>;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t P = grid.n_paths, T = grid.times.size(), K = grid.freqs.size();
  std::vector<cd> doppler_phase(T * P), freq_phase(K * P);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t p = 0; p < P; ++p)
      doppler_phase[t * P + p] = std::polar(1.0, kTwoPi * grid.doppler[p] * grid.times[t]);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t p = 0; p < P; ++p)
      freq_phase[k * P + p] = std::polar(1.0, -kTwoPi * grid.freqs[k] * grid.delay[p]);

  const long n_rows = static_cast<long>(grid.n_antennas * T);
#pragma omp parallel
  {
    std::vector<cd> coeff(P);
#pragma omp for schedule(static)
    for (long row = 0; row < n_rows; ++row) {
      const std::size_t m = static_cast<std::size_t>(row) / T;
      const std::size_t t = static_cast<std::size_t>(row) % T;
      for (std::size_t p = 0; p < P; ++p) coeff[p] = grid.gain[m * P + p] * doppler_phase[t * P + p];
      cd* dst = out.data() + static_cast<std::size_t>(row) * K;
      for (std::size_t k = 0; k < K; ++k) {
        cd acc{0.0, 0.0};
        const cd* fp = freq_phase.data() + k * P;
        for (std::size_t p = 0; p < P; ++p) acc += coeff[p] * fp[p];
        dst[k] = acc;
      }
    }
  }
}

}  // namespace csi4cast::kernels
