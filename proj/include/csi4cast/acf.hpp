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

#include <vector>

#include "csi4cast/core_types.hpp"

namespace csi4cast {

// Sample autocorrelation of complex series: the series mean is removed, lag
// tau averages y[i + tau] * conj(y[i]) over the L - tau available pairs, and
// the result is divided by the lag-0 value. Magnitudes are averaged over all
// series. A series with zero variance counts as fully correlated (1 at every lag).

/// Along time, one series per (sample, antenna, subcarrier). Result has max_lag + 1 entries.
std::vector<double> temporal_acf(const std::vector<CsiSequence>& data, std::size_t max_lag);

/// Along subcarriers, one series per (sample, antenna, step).
std::vector<double> frequency_acf(const std::vector<CsiSequence>& data, std::size_t max_lag);

/// Joint (time, subcarrier) lags, one grid per (sample, antenna). Row-major
/// (max_t_lag + 1) x (max_f_lag + 1).
std::vector<double> acf_2d(const std::vector<CsiSequence>& data, std::size_t max_t_lag,
                           std::size_t max_f_lag);

}  // namespace csi4cast
