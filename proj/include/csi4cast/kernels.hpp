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

// Hot loops of the workbench. Every kernel has an OpenMP-parallel version in
// csi4cast::kernels and a plain serial version in csi4cast::kernels::reference
// with the identical signature; tests check one against the other and
// bench/ times them side by side.

#include <complex>
#include <cstddef>
#include <span>

namespace csi4cast::kernels {

/// Stride-1, same-padding 2D convolution over NCHW tensors.
struct Conv2dShape {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t groups = 1;

  std::size_t in_per_group() const { return in_channels / groups; }
  std::size_t out_per_group() const { return out_channels / groups; }
  std::size_t input_size() const { return batch * in_channels * height * width; }
  std::size_t output_size() const { return batch * out_channels * height * width; }
  std::size_t weight_size() const { return out_channels * in_per_group() * kernel_h * kernel_w; }
};

/// y = conv(x, w) + bias. `bias` may be empty.
void conv2d_forward(const Conv2dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y);
/// dx += conv^T(dy, w).
void conv2d_backward_input(const Conv2dShape& s, std::span<const double> dy,
                           std::span<const double> w, std::span<double> dx);
/// dw += dy (x) x; dbias += sum(dy). `dbias` may be empty.
void conv2d_backward_weight(const Conv2dShape& s, std::span<const double> x,
                            std::span<const double> dy, std::span<double> dw,
                            std::span<double> dbias);

/// Tapped-delay-line frequency response
///   H[m,t,k] = sum_p gain[m,p] * exp(j*2*pi*doppler[p]*time[t]) * exp(-j*2*pi*freq[k]*delay[p])
/// written row-major over (m, t, k) into `out`.
struct TdlGrid {
  std::size_t n_antennas = 0;
  std::size_t n_paths = 0;
  std::span<const std::complex<double>> gain;  // (n_antennas, n_paths), antenna phase folded in
  std::span<const double> doppler;             // Hz, n_paths
  std::span<const double> delay;               // s, n_paths
  std::span<const double> times;               // s
  std::span<const double> freqs;               // Hz, baseband offset per subcarrier
};

void tdl_synthesize(const TdlGrid& grid, std::span<std::complex<double>> out);

namespace reference {

void conv2d_forward(const Conv2dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y);
void conv2d_backward_input(const Conv2dShape& s, std::span<const double> dy,
                           std::span<const double> w, std::span<double> dx);
void conv2d_backward_weight(const Conv2dShape& s, std::span<const double> x,
                            std::span<const double> dy, std::span<double> dw,
                            std::span<double> dbias);
void tdl_synthesize(const TdlGrid& grid, std::span<std::complex<double>> out);

}  // namespace reference
}  // namespace csi4cast::kernels
