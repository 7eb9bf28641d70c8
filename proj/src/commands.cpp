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

#include "csi4cast/commands.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "csi4cast/acf.hpp"
#include "csi4cast/channel_sim.hpp"
#include "csi4cast/dataset_io.hpp"
#include "json.hpp"

namespace csi4cast {

using nlohmann::json;

namespace {

/// Runs body(i) for i in [0, n) on `jobs` threads and rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(jobs, 1))
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json degree_json(double d) { return std::isnan(d) ? json(nullptr) : json(d); }

json scenario_json(const ScenarioDescriptor& s) {
  return {{"id", s.id()},
          {"duplex", std::string(to_string(s.duplex))},
          {"profile", std::string(to_string(s.channel_profile))},
          {"velocity", s.velocity},
          {"delay_spread", s.delay_spread},
          {"noise_type", std::string(to_string(s.noise_type))},
          {"noise_degree", degree_json(s.noise_degree)}};
}

ScenarioDescriptor scenario_from_json(const json& j) {
  ScenarioDescriptor s;
  s.duplex = parse_duplex(j.at("duplex").get<std::string>());
  s.channel_profile = parse_profile(j.at("profile").get<std::string>());
  s.velocity = j.at("velocity").get<double>();
  s.delay_spread = j.at("delay_spread").get<double>();
  s.noise_type = parse_noise_type(j.at("noise_type").get<std::string>());
  const auto& d = j.at("noise_degree");
  s.noise_degree = d.is_null() ? std::nan("") : d.get<double>();
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

void Manifest::save(const fs::path& path) const {
  json sys = json::object();
  for (const auto& [k, v] : kv::describe(system)) sys[k] = v;
  json list = json::array();
  for (const auto& e : entries) {
    list.push_back({{"scenario", scenario_json(e.scenario)},
                    {"file", e.file},
                    {"seed", e.seed},
                    {"samples", e.samples}});
  }
  const json j = {{"format", "csi4cast-manifest"}, {"version", 1},   {"track", track},
                  {"seed", seed},                  {"config_hash", config_hash},
                  {"system", sys},                 {"entries", list}};
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  os << j.dump(2) << '\n';
}

Manifest Manifest::load(const fs::path& path) {
  Manifest m;
  json j;
  try {
    j = json::parse(read_file(path));
    m.track = j.at("track").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [k, v] : j.at("system").items()) {
      if (!kv::apply_system_key(m.system, k, v.get<std::string>())) {
        throw Error(ErrorCode::kInvalidConfig, "unknown system key " + k);
      }
    }
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({scenario_from_json(e.at("scenario")), e.at("file").get<std::string>(),
                           e.at("seed").get<std::uint64_t>(), e.at("samples").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, "malformed manifest " + path.string() + ": " + e.what());
  }
  const fs::path dir = path.parent_path();
  for (const auto& e : m.entries) {
    const fs::path file = dir / e.file;
    if (!fs::exists(file)) throw Error(ErrorCode::kIoError, "missing dataset file " + file.string());
    const DatasetFileHeader h = read_dataset_header(file);
    if (!same_scenario(h.scenario, e.scenario) || !(h.config == m.system) ||
        h.sample_count != e.samples) {
      throw Error(ErrorCode::kIoError, "header of " + file.string() + " disagrees with the manifest");
    }
  }
  return m;
}

Manifest cmd_generate(const RunConfig& cfg, const fs::path& out_dir, int jobs) {
  cfg.model.system.validate();
  if (cfg.grid.samples == 0) throw Error(ErrorCode::kInvalidConfig, "grid.samples must be positive");
  const auto scenarios = cfg.grid.scenarios(cfg.model.system.duplex);
  if (scenarios.empty()) throw Error(ErrorCode::kInvalidConfig, "the scenario grid is empty");
  for (ScenarioDescriptor s : scenarios) {
    if (cfg.grid.training) s.noise_degree = cfg.grid.train_snr_min;
    s.validate();
  }
  fs::create_directories(out_dir);

  Manifest m;
  m.track = cfg.grid.track;
  m.seed = cfg.seed;
  m.config_hash = fnv1a_hex(cfg.to_text());
  m.system = cfg.model.system;
  m.entries.resize(scenarios.size());

  // Scenarios that share a channel triple share clean channels; tracks differ.
  const std::uint64_t track_key = derive_seed(cfg.seed, fnv1a64(cfg.grid.track));
  DatasetOptions opt;
  if (cfg.grid.training) opt.awgn_snr_range = {cfg.grid.train_snr_min, cfg.grid.train_snr_max};

  parallel_for(scenarios.size(), jobs, [&](std::size_t i) {
    const ScenarioDescriptor& s = scenarios[i];
    char triple[96];
    std::snprintf(triple, sizeof(triple), "%s|%.17g|%.17g", std::string(to_string(s.channel_profile)).c_str(),
                  s.delay_spread, s.velocity);
    const std::uint64_t base = derive_seed(track_key, fnv1a64(triple));
    ScenarioDescriptor gen = s;
    if (cfg.grid.training) gen.noise_degree = cfg.grid.train_snr_min;
    const CsiDataset ds = make_dataset(gen, cfg.model.system, cfg.grid.samples, base, opt);
    const std::string file = s.id() + ".c4d";
    save_dataset(ds, out_dir / file);
    m.entries[i] = {dataset_scenario(ds), file, base, ds.samples.size()};
  });
  m.save(out_dir / "manifest.json");
  return m;
}

CsiDataset load_manifest_datasets(const fs::path& manifest_path, int jobs) {
  const Manifest m = Manifest::load(manifest_path);
  std::vector<CsiDataset> parts(m.entries.size());
  parallel_for(m.entries.size(), jobs, [&](std::size_t i) {
    parts[i] = load_dataset(manifest_path.parent_path() / m.entries[i].file);
  });
  CsiDataset all;
  all.config = m.system;
  for (auto& p : parts)
    for (auto& s : p.samples) all.samples.push_back(std::move(s));
  return all;
}

TrainResult cmd_train(const RunConfig& cfg, const fs::path& manifest_path, const fs::path& out_dir,
                      const std::function<void(const EpochReport&)>& on_epoch) {
  if (cfg.model.kind == ModelKind::kNp) {
    throw Error(ErrorCode::kConfigError, "the np baseline has no parameters to train");
  }
  const CsiDataset data = load_manifest_datasets(manifest_path);
  if (!(data.config == cfg.model.system)) {
    throw Error(ErrorCode::kConfigError, "config system.* keys differ from the manifest");
  }
  auto model = make_predictor(cfg.model, cfg.seed);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainResult r;
  r.history = train(*model, data, tc, on_epoch);
  fs::create_directories(out_dir);
  const std::string stem(to_string(cfg.model.kind));
  r.checkpoint = out_dir / (stem + ".ckpt");
  r.history_csv = out_dir / (stem + "_history.csv");
  save_checkpoint(*model, r.checkpoint);
  r.history.write_csv(r.history_csv);
  return r;
}

std::vector<EvaluationRecord> cmd_evaluate(const RunConfig& cfg,
                                           const std::vector<fs::path>& checkpoints,
                                           const fs::path& manifest_path, const fs::path& out_dir,
                                           int jobs) {
  const Manifest m = Manifest::load(manifest_path);
  std::vector<std::string> ids{"np"};
  std::vector<std::unique_ptr<Predictor>> models;
  models.push_back(std::make_unique<NpBaseline>(m.system));
  for (const auto& ck : checkpoints) {
    auto p = load_checkpoint(ck);
    if (!(p->system() == m.system)) {
      throw Error(ErrorCode::kDimensionMismatch, ck.string() + " was built for another system");
    }
    const std::string id = ck.stem().string();
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
      throw Error(ErrorCode::kDuplicateModel, "model id " + id + " appears twice");
    }
    ids.push_back(id);
    models.push_back(std::move(p));
  }

  const std::size_t S = m.entries.size(), K = models.size();
  const std::size_t max_lag = std::min<std::size_t>(m.system.hist_len - 1, 8);
  std::vector<EvaluationRecord> records(S * K);
  std::vector<std::vector<double>> acf(S);
  parallel_for(S, jobs, [&](std::size_t s) {
    const CsiDataset ds = load_dataset(manifest_path.parent_path() / m.entries[s].file);
    for (std::size_t k = 0; k < K; ++k) {
      records[s * K + k] = evaluate_model(*models[k], ids[k], ds, cfg.se_snr_db, cfg.eval_batch);
      records[s * K + k].scenario = m.entries[s].scenario;
    }
    std::vector<CsiSequence> hist;
    for (const auto& smp : ds.samples) hist.push_back(smp.history);
    acf[s] = temporal_acf(hist, max_lag);
  });

  fs::create_directories(out_dir);
  write_evaluation_csv(out_dir / "evaluation.csv", records);
  write_rank_csv(out_dir / "ranks.csv", m.track,
                 {{"nmse", summarize_ranks(records, false)}, {"se", summarize_ranks(records, true)}});
  std::vector<EfficiencyRecord> eff;
  for (std::size_t k = 0; k < K; ++k) eff.push_back(efficiency_record(*models[k], ids[k], cfg.timing_reps));
  write_efficiency_csv(out_dir / "efficiency.csv", eff);
  write_timing_csv(out_dir / "timing.csv", eff);
  {
    std::ofstream os(out_dir / "acf.csv");
    os << "scenario,velocity,lag,acf\n";
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t l = 0; l < acf[s].size(); ++l)
        os << m.entries[s].scenario.id() << ',' << kv::format_double(m.entries[s].scenario.velocity)
           << ',' << l << ',' << kv::format_double(acf[s][l]) << '\n';
  }
  {
    std::ofstream os(out_dir / "stamp.csv");
    os << "key,value\n";
    os << "config_hash," << fnv1a_hex(cfg.to_text()) << '\n';
    os << "run_seed," << cfg.seed << '\n';
    os << "manifest_track," << m.track << '\n';
    os << "manifest_seed," << m.seed << '\n';
    os << "manifest_config_hash," << m.config_hash << '\n';
    for (std::size_t k = 1; k < K; ++k) {
      os << "checkpoint_hash:" << ids[k] << ',' << fnv1a_hex(read_file(checkpoints[k - 1])) << '\n';
    }
  }
  return records;
}

void cmd_report(const fs::path& eval_dir, const fs::path& out_dir,
                const std::vector<double>& train_velocities) {
  const fs::path eval_csv = eval_dir / "evaluation.csv";
  if (!fs::exists(eval_csv)) {
    throw Error(ErrorCode::kMissingData, "no evaluation.csv in " + eval_dir.string());
  }
  const auto records = read_evaluation_csv(eval_csv);
  if (records.empty()) throw Error(ErrorCode::kMissingData, eval_csv.string() + " has no rows");
  fs::create_directories(out_dir);
  using kv::format_double;

  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  // Mean NMSE per (model, duplex, x) for one factor x, aggregated over the rest.
  auto curve = [&](const fs::path& file, const std::string& header,
                   const std::function<std::string(const EvaluationRecord&)>& key,
                   const std::function<std::string(const std::string&)>& extra) {
    std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
    for (const auto& r : records) {
      auto& a = acc[{r.model, std::string(to_string(r.scenario.duplex)), key(r)}];
      a.sum += r.nmse;
      ++a.n;
    }
    std::ofstream os(out_dir / file);
    os << "model,duplex," << header << ",mean_nmse,mean_nmse_db,records" << (extra ? ",region" : "")
       << '\n';
    for (const auto& [k, a] : acc) {
      const double mean = a.sum / static_cast<double>(a.n);
      os << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ','
         << format_double(mean) << ',' << format_double(to_db(mean)) << ',' << a.n;
      if (extra) os << ',' << extra(std::get<2>(k));
      os << '\n';
    }
  };
  curve("nmse_vs_snr.csv", "noise_type,degree",
        [](const EvaluationRecord& r) {
          return std::string(to_string(r.scenario.noise_type)) + "," +
                 format_double(r.scenario.noise_degree);
        },
        {});
  const double v_lo = train_velocities.empty() ? 0.0 : *std::min_element(train_velocities.begin(), train_velocities.end());
  const double v_hi = train_velocities.empty() ? 0.0 : *std::max_element(train_velocities.begin(), train_velocities.end());
  curve("nmse_vs_velocity.csv", "velocity",
        [](const EvaluationRecord& r) { return format_double(r.scenario.velocity); },
        [&](const std::string& v) {
          const double x = kv::parse_double("velocity", v);
          for (double t : train_velocities)
            if (t == x) return std::string("trained");
          return std::string(x >= v_lo && x <= v_hi ? "interpolation" : "extrapolation");
        });
  curve("nmse_vs_profile.csv", "profile",
        [](const EvaluationRecord& r) { return std::string(to_string(r.scenario.channel_profile)); },
        {});
  curve("nmse_vs_delay_spread.csv", "delay_spread",
        [](const EvaluationRecord& r) { return format_double(r.scenario.delay_spread); }, {});

  // Rank distribution: how often each model takes each rank.
  {
    std::ofstream os(out_dir / "rank_distribution.csv");
    os << "metric,model,rank,count\n";
    for (const bool use_se : {false, true}) {
      std::vector<std::string> models;
      std::map<std::string, std::map<std::string, double>> table;
      for (const auto& r : records) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        table[r.scenario.id()][r.model] = use_se ? r.se : r.nmse;
      }
      std::map<std::pair<std::string, std::size_t>, std::size_t> counts;
      for (const auto& [id, row] : table) {
        if (row.size() != models.size()) continue;
        std::vector<double> values;
        for (const auto& md : models) values.push_back(row.at(md));
        const auto ranks = scenario_rank(models, values,
                                         use_se ? RankOrder::kDescending : RankOrder::kAscending);
        for (std::size_t i = 0; i < models.size(); ++i) ++counts[{models[i], ranks[i]}];
      }
      for (const auto& [k, c] : counts) {
        os << (use_se ? "se" : "nmse") << ',' << k.first << ',' << k.second << ',' << c << '\n';
      }
    }
  }

  // ACF stems averaged per velocity.
  const fs::path acf_csv = eval_dir / "acf.csv";
  if (fs::exists(acf_csv)) {
    std::ifstream is(acf_csv);
    std::string line;
    std::getline(is, line);
    std::map<std::pair<double, std::size_t>, Acc> acc;
    while (std::getline(is, line)) {
      std::stringstream ss(line);
      std::string id, v, lag, val;
      std::getline(ss, id, ',');
      std::getline(ss, v, ',');
      std::getline(ss, lag, ',');
      std::getline(ss, val, ',');
      auto& a = acc[{kv::parse_double("velocity", v), kv::parse_size("lag", lag)}];
      a.sum += kv::parse_double("acf", val);
      ++a.n;
    }
    std::ofstream os(out_dir / "acf_stem.csv");
    os << "velocity,lag,mean_acf\n";
    for (const auto& [k, a] : acc) {
      os << format_double(k.first) << ',' << k.second << ','
         << format_double(a.sum / static_cast<double>(a.n)) << '\n';
    }
  }

  // Plain-text summary of the rank table.
  {
    std::ofstream os(out_dir / "summary.txt");
    os << "scenarios: " << records.size() << " records\n";
    for (const bool use_se : {false, true}) {
      os << (use_se ? "SE" : "NMSE") << " ranks\n";
      for (const auto& s : summarize_ranks(records, use_se)) {
        os << "  " << s.model << "  mean_rank " << format_double(s.mean_rank) << "  rank_score "
           << format_double(s.rank_score) << "  p_rank1 " << format_double(s.p_rank1) << '\n';
      }
    }
  }
}

}  // namespace csi4cast
