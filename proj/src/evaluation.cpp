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

#include "csi4cast/evaluation.hpp"

#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "csi4cast/keyvalue.hpp"

namespace csi4cast {

EvaluationRecord evaluate_model(const Predictor& model, const std::string& model_id,
                                const CsiDataset& dataset, double se_snr_db,
                                std::size_t batch_size) {
  if (dataset.samples.empty()) throw Error(ErrorCode::kEmptySubset, "empty dataset");
  EvaluationRecord rec;
  rec.model = model_id;
  rec.scenario = dataset.samples.front().scenario;
  const std::size_t n = dataset.samples.size();
  for (std::size_t b = 0; b < n; b += batch_size) {
    const std::size_t e = std::min(n, b + batch_size);
    std::vector<const CsiSequence*> hist;
    for (std::size_t i = b; i < e; ++i) hist.push_back(&dataset.samples[i].history);
    const auto pred = model.predict(hist);
    for (std::size_t i = b; i < e; ++i) {
      const CsiSequence& target = dataset.samples[i].target;
      rec.nmse += nmse_metric(pred[i - b], target);
      const auto [se_hat, se] = sequence_se(pred[i - b], target, se_noise_var(target, se_snr_db));
      rec.se += se_hat;
      rec.se_ideal += se;
    }
  }
  rec.nmse /= static_cast<double>(n);
  rec.se /= static_cast<double>(n);
  rec.se_ideal /= static_cast<double>(n);
  rec.samples = n;
  return rec;
}

std::vector<std::size_t> scenario_rank(const std::vector<std::string>& models,
                                       const std::vector<double>& values, RankOrder order) {
  if (models.size() != values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one value per model is required");
  }
  if (std::set<std::string>(models.begin(), models.end()).size() != models.size()) {
    throw Error(ErrorCode::kDuplicateModel, "a model appears twice in one scenario");
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    return order == RankOrder::kAscending ? values[a] < values[b] : values[a] > values[b];
  };
  std::stable_sort(idx.begin(), idx.end(), better);
  std::vector<std::size_t> rank(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && values[idx[i]] == values[idx[i - 1]]) rank[idx[i]] = rank[idx[i - 1]];
    else rank[idx[i]] = i + 1;
  }
  return rank;
}

std::vector<RankSummary> rank_summaries(const std::vector<std::string>& models,
                                        const std::vector<std::vector<std::size_t>>& ranks) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptySubset, "no scenarios to summarize");
  const double n_models = static_cast<double>(models.size());
  const double n_scen = static_cast<double>(ranks.size());
  std::vector<RankSummary> out(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    out[i].model = models[i];
    double sum = 0.0, firsts = 0.0;
    for (const auto& row : ranks) {
      if (row.size() != models.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "rank row length differs from model count");
      }
      sum += static_cast<double>(row[i]);
      firsts += row[i] == 1 ? 1.0 : 0.0;
    }
    out[i].mean_rank = sum / n_scen;
    out[i].rank_score = n_models - out[i].mean_rank;
    out[i].p_rank1 = firsts / n_scen;
  }
  return out;
}

std::vector<double> eff_score(const std::vector<double>& costs) {
  double mx = 0.0;
  for (double c : costs) {
    if (c < 0.0 || !std::isfinite(c)) throw Error(ErrorCode::kInvalidParams, "invalid cost");
    mx = std::max(mx, c);
  }
  if (mx == 0.0) throw Error(ErrorCode::kAllZeroCosts, "every model has zero cost");
  std::vector<double> out;
  out.reserve(costs.size());
  for (double c : costs) out.push_back(1.0 - c / mx);
  return out;
}

ParamCount count_params(const Predictor& model) {
  ParamCount c;
  for (const nn::Parameter* p : model.parameters().all()) {
    c.total += p->numel();
    if (!p->buffer) c.trainable += p->numel();
  }
  return c;
}

double count_flops(const Predictor& model) {
  const SystemConfig& s = model.system();
  nn::Graph g(false);
  model.forward(g, g.input(nn::Tensor({s.n_tx, 2, s.hist_len, s.n_sc})));
  return g.flops();
}

double measure_inference_time(const Predictor& model, std::size_t reps, std::size_t warmup) {
  const SystemConfig& s = model.system();
  CsiSequence history(s.n_tx, s.hist_len, s.n_sc);
  for (auto& v : history.data()) v = {1.0, -0.5};
  const int omp_threads = omp_get_max_threads();
  const int eigen_threads = Eigen::nbThreads();
  omp_set_num_threads(1);
  Eigen::setNbThreads(1);
  for (std::size_t i = 0; i < warmup; ++i) (void)model.predict(history);
  std::vector<double> ms;
  for (std::size_t i = 0; i < std::max<std::size_t>(reps, 1); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)model.predict(history);
    ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  omp_set_num_threads(omp_threads);
  Eigen::setNbThreads(eigen_threads);
  std::nth_element(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(ms.size() / 2), ms.end());
  return ms[ms.size() / 2];
}

EfficiencyRecord efficiency_record(const Predictor& model, const std::string& model_id,
                                   std::size_t timing_reps) {
  const ParamCount pc = count_params(model);
  EfficiencyRecord r;
  r.model = model_id;
  r.trainable_params = pc.trainable;
  r.total_params = pc.total;
  r.flops = count_flops(model);
  r.inference_ms = timing_reps > 0 ? measure_inference_time(model, timing_reps) : 0.0;
  return r;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return os;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kEvalHeader =
    "model,scenario,duplex,profile,velocity,delay_spread,noise_type,noise_degree,nmse,nmse_db,se,"
    "se_ideal,samples";

}  // namespace

void write_evaluation_csv(const std::filesystem::path& path,
                          const std::vector<EvaluationRecord>& records) {
  auto os = open_csv(path);
  os << kEvalHeader << '\n';
  using kv::format_double;
  for (const auto& r : records) {
    const auto& s = r.scenario;
    os << r.model << ',' << s.id() << ',' << to_string(s.duplex) << ','
       << to_string(s.channel_profile) << ',' << format_double(s.velocity) << ','
       << format_double(s.delay_spread) << ',' << to_string(s.noise_type) << ','
       << format_double(s.noise_degree) << ',' << format_double(r.nmse) << ','
       << format_double(to_db(r.nmse)) << ',' << format_double(r.se) << ','
       << format_double(r.se_ideal) << ',' << r.samples << '\n';
  }
}

std::vector<EvaluationRecord> read_evaluation_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kMissingData, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kEvalHeader) {
    throw Error(ErrorCode::kMissingData, path.string() + " is not an evaluation table");
  }
  std::vector<EvaluationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_row(line);
    if (c.size() != 13) throw Error(ErrorCode::kMissingData, "malformed row in " + path.string());
    EvaluationRecord r;
    r.model = c[0];
    r.scenario.duplex = parse_duplex(c[2]);
    r.scenario.channel_profile = parse_profile(c[3]);
    r.scenario.velocity = kv::parse_double("velocity", c[4]);
    r.scenario.delay_spread = kv::parse_double("delay_spread", c[5]);
    r.scenario.noise_type = parse_noise_type(c[6]);
    r.scenario.noise_degree = kv::parse_double("noise_degree", c[7]);
    r.nmse = kv::parse_double("nmse", c[8]);
    r.se = kv::parse_double("se", c[10]);
    r.se_ideal = kv::parse_double("se_ideal", c[11]);
    r.samples = kv::parse_size("samples", c[12]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_rank_csv(const std::filesystem::path& path, const std::string& track,
                    const RankTable& by_metric) {
  auto os = open_csv(path);
  os << "track,metric,model,mean_rank,rank_score,p_rank1\n";
  for (const auto& [metric, summaries] : by_metric) {
    for (const auto& s : summaries) {
      os << track << ',' << metric << ',' << s.model << ',' << kv::format_double(s.mean_rank)
         << ',' << kv::format_double(s.rank_score) << ',' << kv::format_double(s.p_rank1) << '\n';
    }
  }
}

void write_efficiency_csv(const std::filesystem::path& path,
                          const std::vector<EfficiencyRecord>& records) {
  std::vector<double> params, flops;
  for (const auto& r : records) {
    params.push_back(static_cast<double>(r.trainable_params));
    flops.push_back(r.flops);
  }
  auto scores = [](const std::vector<double>& c) {
    for (double v : c)
      if (v > 0.0) return eff_score(c);
    return std::vector<double>(c.size(), std::nan(""));
  };
  const auto eff_p = scores(params);
  const auto eff_f = scores(flops);
  auto os = open_csv(path);
  os << "model,trainable_params,total_params,flops,eff_params,eff_flops\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << r.model << ',' << r.trainable_params << ',' << r.total_params << ','
       << kv::format_double(r.flops) << ',' << kv::format_double(eff_p[i]) << ','
       << kv::format_double(eff_f[i]) << '\n';
  }
}

void write_timing_csv(const std::filesystem::path& path,
                      const std::vector<EfficiencyRecord>& records) {
  std::vector<double> ms;
  for (const auto& r : records) ms.push_back(r.inference_ms);
  bool any = false;
  for (double v : ms) any = any || v > 0.0;
  const auto eff = any ? eff_score(ms) : std::vector<double>(ms.size(), std::nan(""));
  auto os = open_csv(path);
  os << "model,inference_ms,eff_time\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    os << records[i].model << ',' << kv::format_double(ms[i]) << ',' << kv::format_double(eff[i])
       << '\n';
  }
}

std::vector<RankSummary> summarize_ranks(const std::vector<EvaluationRecord>& records,
                                         bool use_se) {
  std::vector<std::string> models;
  std::map<std::string, std::map<std::string, double>> table;  // scenario -> model -> value
  for (const auto& r : records) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    auto& row = table[r.scenario.id()];
    if (row.contains(r.model)) {
      throw Error(ErrorCode::kDuplicateModel, r.model + " appears twice in " + r.scenario.id());
    }
    row[r.model] = use_se ? r.se : r.nmse;
  }
  std::vector<std::vector<std::size_t>> ranks;
  for (const auto& [id, row] : table) {
    if (row.size() != models.size()) {
      throw Error(ErrorCode::kMissingData, "scenario " + id + " lacks some models");
    }
    std::vector<double> values;
    for (const auto& m : models) values.push_back(row.at(m));
    ranks.push_back(
        scenario_rank(models, values, use_se ? RankOrder::kDescending : RankOrder::kAscending));
  }
  return rank_summaries(models, ranks);
}

}  // namespace csi4cast
