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

#include <cmath>
#include <numbers>

#include "csi4cast/kernels.hpp"

namespace csi4cast::kernels::reference {

namespace {
// Offset of the input sample under kernel tap (ky, kx) at output (y, x); -1 in the padding.
long tap(const Conv2dShape& s, std::size_t y, std::size_t x, std::size_t ky, std::size_t kx) {
  const long sy = static_cast<long>(y + ky) - static_cast<long>(s.kernel_h / 2);
  const long sx = static_cast<long>(x + kx) - static_cast<long>(s.kernel_w / 2);
  if (sy < 0 || sx < 0 || sy >= static_cast<long>(s.height) || sx >= static_cast<long>(s.width)) {
    return -1;
  }
  return sy * static_cast<long>(s.width) + sx;
}
}  // namespace

void conv2d_forward(const Conv2dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y) {
  const std::size_t H = s.height, W = s.width, cig = s.in_per_group(), cog = s.out_per_group();
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      const std::size_t g = co / cog;
      for (std::size_t yy = 0; yy < H; ++yy) {
        for (std::size_t xx = 0; xx < W; ++xx) {
          double acc = bias.empty() ? 0.0 : bias[co];
          for (std::size_t ci = 0; ci < cig; ++ci) {
            const double* plane = x.data() + (b * s.in_channels + g * cig + ci) * H * W;
            for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
              for (std::size_t kx = 0; kx < s.kernel_w; ++kx) {
                if (const long o = tap(s, yy, xx, ky, kx); o >= 0) {
                  acc += plane[o] * w[((co * cig + ci) * s.kernel_h + ky) * s.kernel_w + kx];
                }
              }
            }
          }
          y[((b * s.out_channels + co) * H + yy) * W + xx] = acc;
        }
      }
    }
  }
}

void conv2d_backward_input(const Conv2dShape& s, std::span<const double> dy,
                           std::span<const double> w, std::span<double> dx) {
  const std::size_t H = s.height, W = s.width, cig = s.in_per_group(), cog = s.out_per_group();
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      const std::size_t g = co / cog;
      for (std::size_t yy = 0; yy < H; ++yy) {
        for (std::size_t xx = 0; xx < W; ++xx) {
          const double d = dy[((b * s.out_channels + co) * H + yy) * W + xx];
          for (std::size_t ci = 0; ci < cig; ++ci) {
            double* plane = dx.data() + (b * s.in_channels + g * cig + ci) * H * W;
            for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
              for (std::size_t kx = 0; kx < s.kernel_w; ++kx) {
                if (const long o = tap(s, yy, xx, ky, kx); o >= 0) {
                  plane[o] += d * w[((co * cig + ci) * s.kernel_h + ky) * s.kernel_w + kx];
                }
              }
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_weight(const Conv2dShape& s, std::span<const double> x,
                            std::span<const double> dy, std::span<double> dw,
                            std::span<double> dbias) {
  const std::size_t H = s.height, W = s.width, cig = s.in_per_group(), cog = s.out_per_group();
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t co = 0; co < s.out_channels; ++co) {
      const std::size_t g = co / cog;
      for (std::size_t yy = 0; yy < H; ++yy) {
        for (std::size_t xx = 0; xx < W; ++xx) {
          const double d = dy[((b * s.out_channels + co) * H + yy) * W + xx];
          if (!dbias.empty()) dbias[co] += d;
          for (std::size_t ci = 0; ci < cig; ++ci) {
            const double* plane = x.data() + (b * s.in_channels + g * cig + ci) * H * W;
            for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
              for (std::size_t kx = 0; kx < s.kernel_w; ++kx) {
                if (const long o = tap(s, yy, xx, ky, kx); o >= 0) {
                  dw[((co * cig + ci) * s.kernel_h + ky) * s.kernel_w + kx] += d * plane[o];
                }
              }
            }
          }
        }
      }
    }
  }
}

void tdl_synthesize(const TdlGrid& grid, std::span<std::complex<double>> out) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t P = grid.n_paths, T = grid.times.size(), K = grid.freqs.size();
  for (std::size_t m = 0; m < grid.n_antennas; ++m) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < K; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t p = 0; p < P; ++p) {
          const double phase =
              kTwoPi * (grid.doppler[p] * grid.times[t] - grid.freqs[k] * grid.delay[p]);
          acc += grid.gain[m * P + p] * std::polar(1.0, phase);
        }
        out[(m * T + t) * K + k] = acc;
      }
    }
  }
}

}  // namespace csi4cast::kernels::reference
