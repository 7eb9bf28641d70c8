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
#include <random>
#include <vector>

#include "csi4cast/metrics.hpp"
#include "test_util.hpp"

using namespace csi4cast;
using testing_util::random_sequence;

namespace {

std::vector<cdouble> random_beams(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cdouble> v(n);
  for (auto& x : v) x = {nd(rng), nd(rng)};
  return v;
}

}  // namespace

TEST(SpectralEfficiency, ZeroChannelIsZero) {
  const std::vector<cdouble> h(12, cdouble{0.0, 0.0});
  EXPECT_EQ(spectral_efficiency(h, 4, 0.1), 0.0);
}

TEST(SpectralEfficiency, UnitSnrGivesOneBit) {
  // Every subcarrier has |h|^2 equal to the noise variance.
  std::vector<cdouble> h{{0.6, 0.0}, {0.0, 0.8}, {1.0, 0.0}, {0.0, 0.0}};
  EXPECT_NEAR(spectral_efficiency(h, 2, 1.0), 1.0, 1e-12);
}

TEST(SpectralEfficiency, MatchesScalarLoop) {
  const std::size_t n_ant = 3, n_sc = 5;
  const auto h = random_beams(n_ant * n_sc, 3);
  const double sigma2 = 0.37;
  double expect = 0.0;
  for (std::size_t k = 0; k < n_sc; ++k) {
    double g = 0.0;
    for (std::size_t m = 0; m < n_ant; ++m) g += std::norm(h[k * n_ant + m]);
    expect += std::log(1.0 + g / sigma2) / std::log(2.0);
  }
  EXPECT_NEAR(spectral_efficiency(h, n_ant, sigma2), expect / n_sc, 1e-12);
}

TEST(PredictedSe, PerfectPredictionEqualsIdeal) {
  const auto h = random_beams(16, 4);
  EXPECT_NEAR(predicted_se(h, h, 4, 0.2), spectral_efficiency(h, 4, 0.2), 1e-12);
}

TEST(PredictedSe, OrthogonalPredictionIsZero) {
  const std::vector<cdouble> h{{1.0, 0.0}, {0.0, 0.0}, {0.0, 2.0}, {0.0, 0.0}};
  const std::vector<cdouble> h_hat{{0.0, 0.0}, {3.0, 1.0}, {0.0, 0.0}, {-1.0, 0.0}};
  EXPECT_EQ(predicted_se(h_hat, h, 2, 0.5), 0.0);
}

TEST(PredictedSe, InvariantToComplexScale) {
  const auto h = random_beams(20, 5);
  const auto h_hat = random_beams(20, 6);
  auto scaled = h_hat;
  const cdouble c{-2.5, 1.7};
  for (auto& v : scaled) v *= c;
  EXPECT_NEAR(predicted_se(scaled, h, 4, 0.3), predicted_se(h_hat, h, 4, 0.3), 1e-12);
}

TEST(PredictedSe, NeverExceedsIdeal) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto h = random_beams(24, 100 + seed);
    const auto h_hat = random_beams(24, 200 + seed);
    EXPECT_LE(predicted_se(h_hat, h, 3, 0.1), spectral_efficiency(h, 3, 0.1) + 1e-12);
  }
}

TEST(PredictedSe, ZeroPredictionContributesNothing) {
  const auto h = random_beams(8, 7);
  const std::vector<cdouble> zero(8, cdouble{0.0, 0.0});
  EXPECT_EQ(predicted_se(zero, h, 2, 1.0), 0.0);
}

TEST(PredictedSe, RejectsBadNoiseVariance) {
  const auto h = random_beams(8, 8);
  EXPECT_ERROR_CODE(predicted_se(h, h, 2, 0.0), ErrorCode::kInvalidNoiseVar);
  EXPECT_ERROR_CODE(predicted_se(h, h, 2, -1.0), ErrorCode::kInvalidNoiseVar);
  EXPECT_ERROR_CODE(spectral_efficiency(h, 2, std::nan("")), ErrorCode::kInvalidNoiseVar);
  EXPECT_ERROR_CODE(spectral_efficiency(h, 3, 1.0), ErrorCode::kDimensionMismatch);
}

TEST(NmseMetric, Examples) {
  const CsiSequence t = random_sequence(2, 3, 4, 1);
  EXPECT_EQ(nmse_metric(t, t), 0.0);
  CsiSequence zero(2, 3, 4);
  EXPECT_NEAR(nmse_metric(zero, t), 1.0, 1e-15);
  CsiSequence twice = t;
  for (auto& v : twice.data()) v *= 2.0;
  EXPECT_NEAR(nmse_metric(twice, t), 1.0, 1e-12);
  EXPECT_ERROR_CODE(nmse_metric(t, zero), ErrorCode::kZeroTarget);
  EXPECT_ERROR_CODE(nmse_metric(CsiSequence(2, 3, 5), t), ErrorCode::kDimensionMismatch);
}

TEST(SeNoiseVar, PlacesMeanCellPowerAtSnr) {
  CsiSequence t(4, 2, 3);
  for (auto& v : t.data()) v = {1.0, 1.0};  // |h_k|^2 = 4 * 2 = 8 per cell
  EXPECT_NEAR(se_noise_var(t, 10.0), 0.8, 1e-12);
  EXPECT_NEAR(se_noise_var(t, 0.0), 8.0, 1e-12);
  EXPECT_ERROR_CODE(se_noise_var(CsiSequence(4, 2, 3)), ErrorCode::kZeroTarget);
}

TEST(SequenceSe, PerfectPredictionMatchesIdeal) {
  const CsiSequence t = random_sequence(4, 3, 6, 9);
  const double nv = se_noise_var(t);
  const auto [se_hat, se] = sequence_se(t, t, nv);
  EXPECT_NEAR(se_hat, se, 1e-12);
  double expect = 0.0;
  for (std::size_t s = 0; s < 3; ++s) expect += spectral_efficiency(beam_vectors(t, s), 4, nv);
  EXPECT_NEAR(se, expect / 3.0, 1e-12);
}

TEST(BeamVectors, SubcarrierMajorLayout) {
  const CsiSequence t = random_sequence(3, 2, 4, 10);
  const auto b = beam_vectors(t, 1);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(b[k * 3 + m], t.at(m, 1, k));
}
