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

#include <filesystem>
#include <string>
#include <vector>

#include "csi4cast/metrics.hpp"
#include "csi4cast/predictor.hpp"

namespace csi4cast {

struct EvaluationRecord {
  std::string model;
  ScenarioDescriptor scenario;
  double nmse = 0.0;
  double se = 0.0;        // predicted-beam SE, bits/s/Hz
  double se_ideal = 0.0;  // ground-truth-beam SE at the same noise level
  std::size_t samples = 0;
};

struct EfficiencyRecord {
  std::string model;
  std::size_t trainable_params = 0;
  std::size_t total_params = 0;
  double flops = 0.0;  // one forward over every antenna of one sequence
  double inference_ms = 0.0;
};

/// Mean NMSE and SE of `model` on every sample of `dataset`. The SE noise
/// variance of each sample sits `se_snr_db` below its mean target power.
EvaluationRecord evaluate_model(const Predictor& model, const std::string& model_id,
                                const CsiDataset& dataset, double se_snr_db = 10.0,
                                std::size_t batch_size = 64);

enum class RankOrder { kAscending, kDescending };  // NMSE ascending, SE descending

/// Competition ranking ("1224") of one scenario's values; ties share the lowest rank.
/// Throws kDuplicateModel when a model id repeats.
std::vector<std::size_t> scenario_rank(const std::vector<std::string>& models,
                                       const std::vector<double>& values, RankOrder order);

struct RankSummary {
  std::string model;
  double mean_rank = 0.0;
  double rank_score = 0.0;  // |models| - mean_rank
  double p_rank1 = 0.0;
};

/// ranks[s][i] is the rank of model i in scenario s. Throws kEmptySubset when no scenarios.
std::vector<RankSummary> rank_summaries(const std::vector<std::string>& models,
                                        const std::vector<std::vector<std::size_t>>& ranks);

/// 1 - c / max c. Throws kAllZeroCosts when every cost is zero.
std::vector<double> eff_score(const std::vector<double>& costs);

struct ParamCount {
  std::size_t trainable = 0;
  std::size_t total = 0;  // trainable plus normalization buffers
};
ParamCount count_params(const Predictor& model);
/// FLOPs of one eval-mode forward of a full sequence (all n_tx antennas).
double count_flops(const Predictor& model);
/// Median wall-clock ms of `reps` single-sequence forwards after `warmup` runs.
double measure_inference_time(const Predictor& model, std::size_t reps = 20,
                              std::size_t warmup = 3);

EfficiencyRecord efficiency_record(const Predictor& model, const std::string& model_id,
                                   std::size_t timing_reps = 20);

// CSV writers; column orders are listed in docs/csv_schemas.md.
void write_evaluation_csv(const std::filesystem::path& path,
                          const std::vector<EvaluationRecord>& records);
using RankTable = std::vector<std::pair<std::string, std::vector<RankSummary>>>;  // per metric
void write_rank_csv(const std::filesystem::path& path, const std::string& track,
                    const RankTable& by_metric);
/// Includes eff_score columns for parameters and FLOPs when some cost is nonzero.
void write_efficiency_csv(const std::filesystem::path& path,
                          const std::vector<EfficiencyRecord>& records);
void write_timing_csv(const std::filesystem::path& path,
                      const std::vector<EfficiencyRecord>& records);

std::vector<EvaluationRecord> read_evaluation_csv(const std::filesystem::path& path);

/// Ranks and summaries of a (model x scenario) table of records for one metric.
std::vector<RankSummary> summarize_ranks(const std::vector<EvaluationRecord>& records,
                                         bool use_se);

}  // namespace csi4cast
