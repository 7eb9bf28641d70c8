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

#include "csi4cast/acf.hpp"

#include <cmath>

namespace csi4cast {

namespace {

/// |ACF| of a strided 2D grid y[t * rs + k * cs], t < rows, k < cols, added into `out`.
void accumulate_grid(const cdouble* base, std::size_t rows, std::size_t cols, std::ptrdiff_t rs,
                     std::ptrdiff_t cs, std::size_t max_r, std::size_t max_c, double* out) {
  std::vector<cdouble> y(rows * cols);
  cdouble mean{0.0, 0.0};
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t k = 0; k < cols; ++k) {
      y[t * cols + k] = base[static_cast<std::ptrdiff_t>(t) * rs + static_cast<std::ptrdiff_t>(k) * cs];
      mean += y[t * cols + k];
    }
  mean /= static_cast<double>(rows * cols);
  double r0 = 0.0;
  for (auto& v : y) {
    v -= mean;
    r0 += std::norm(v);
  }
  r0 /= static_cast<double>(rows * cols);
  const std::size_t width = max_c + 1;
  if (!(r0 > 1e-300)) {
    for (std::size_t i = 0; i < (max_r + 1) * width; ++i) out[i] += 1.0;
    return;
  }
  for (std::size_t dt = 0; dt <= max_r; ++dt) {
    for (std::size_t df = 0; df <= max_c; ++df) {
      cdouble acc{0.0, 0.0};
      for (std::size_t t = 0; t + dt < rows; ++t) {
        const cdouble* a = &y[(t + dt) * cols + df];
        const cdouble* b = &y[t * cols];
        for (std::size_t k = 0; k + df < cols; ++k) acc += a[k] * std::conj(b[k]);
      }
      const double pairs = static_cast<double>((rows - dt) * (cols - df));
      out[dt * width + df] += dt == 0 && df == 0 ? 1.0 : std::abs(acc / pairs) / r0;
    }
  }
}

void check(const std::vector<CsiSequence>& data) {
  if (data.empty()) throw Error(ErrorCode::kSeriesTooShort, "no series");
  for (const auto& s : data) {
    if (s.n_tx() != data[0].n_tx() || s.len() != data[0].len() || s.n_sc() != data[0].n_sc()) {
      throw Error(ErrorCode::kDimensionMismatch, "ACF inputs differ in shape");
    }
  }
}

/// Averages per-grid results over grids g in [0, n), in a fixed order.
template <class F>
std::vector<double> average(std::size_t n, std::size_t cells, F&& grid) {
  std::vector<double> partial(n * cells, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(n); ++g) {
    grid(static_cast<std::size_t>(g), partial.data() + static_cast<std::size_t>(g) * cells);
  }
  std::vector<double> out(cells, 0.0);
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t c = 0; c < cells; ++c) out[c] += partial[g * cells + c];
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

}  // namespace

std::vector<double> temporal_acf(const std::vector<CsiSequence>& data, std::size_t max_lag) {
  check(data);
  const std::size_t M = data[0].n_tx(), T = data[0].len(), N = data[0].n_sc();
  if (T <= max_lag) throw Error(ErrorCode::kSeriesTooShort, "series shorter than max_lag + 1");
  return average(data.size() * M * N, max_lag + 1, [&](std::size_t g, double* out) {
    const std::size_t k = g % N, m = (g / N) % M, s = g / (N * M);
    const cdouble* base = &data[s].at(m, 0, k);
    accumulate_grid(base, T, 1, static_cast<std::ptrdiff_t>(N), 1, max_lag, 0, out);
  });
}

std::vector<double> frequency_acf(const std::vector<CsiSequence>& data, std::size_t max_lag) {
  check(data);
  const std::size_t M = data[0].n_tx(), T = data[0].len(), N = data[0].n_sc();
  if (N <= max_lag) throw Error(ErrorCode::kSeriesTooShort, "series shorter than max_lag + 1");
  return average(data.size() * M * T, max_lag + 1, [&](std::size_t g, double* out) {
    const std::size_t t = g % T, m = (g / T) % M, s = g / (T * M);
    const cdouble* base = &data[s].at(m, t, 0);
    accumulate_grid(base, 1, N, 0, 1, 0, max_lag, out);
  });
}

std::vector<double> acf_2d(const std::vector<CsiSequence>& data, std::size_t max_t_lag,
                           std::size_t max_f_lag) {
  check(data);
  const std::size_t M = data[0].n_tx(), T = data[0].len(), N = data[0].n_sc();
  if (T <= max_t_lag || N <= max_f_lag) {
    throw Error(ErrorCode::kSeriesTooShort, "grid smaller than the requested lags");
  }
  return average(data.size() * M, (max_t_lag + 1) * (max_f_lag + 1),
                 [&](std::size_t g, double* out) {
                   const std::size_t m = g % M, s = g / M;
                   accumulate_grid(&data[s].at(m, 0, 0), T, N, static_cast<std::ptrdiff_t>(N), 1,
                                   max_t_lag, max_f_lag, out);
                 });
}

}  // namespace csi4cast
