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

#include "csi4cast/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace csi4cast {

std::vector<ScenarioDescriptor> GridConfig::scenarios(Duplex duplex) const {
  std::vector<ScenarioDescriptor> out;
  for (const auto& prof : profiles) {
    for (double ds : delay_spreads_ns) {
      for (double v : velocities) {
        ScenarioDescriptor s;
        s.duplex = duplex;
        s.channel_profile = parse_profile(prof);
        s.delay_spread = ds * 1e-9;
        s.velocity = v;
        if (training) {
          s.noise_type = NoiseType::kAwgn;
          s.noise_degree = std::nan("");
          out.push_back(s);
          continue;
        }
        for (const auto& nt : noise_types) {
          s.noise_type = parse_noise_type(nt);
          std::vector<double> degrees;
          switch (s.noise_type) {
            case NoiseType::kNone: degrees = {0.0}; break;
            case NoiseType::kPacketDrop: degrees = drop_probs; break;
            default: degrees = snr_db; break;
          }
          for (double d : degrees) {
            s.noise_degree = d;
            out.push_back(s);
          }
        }
      }
    }
  }
  return out;
}

GridConfig grid_preset(const std::string& name) {
  GridConfig g;
  g.track = name;
  if (name == "regular") return g;
  if (name == "train") {
    g.training = true;
    g.samples = 200;
    return g;
  }
  if (name == "robustness") {
    g.noise_types = {"PHASE", "BURST", "PACKET_DROP"};
    g.snr_db = {10.0, 15.0, 20.0, 25.0};
    return g;
  }
  if (name == "generalization") {
    g.profiles = {"NLOS-A", "NLOS-B", "NLOS-C", "LOS-D", "LOS-E"};
    g.delay_spreads_ns = {30.0, 50.0, 100.0, 200.0, 300.0, 400.0};
    g.velocities = {1.0, 10.0};
    for (int v = 3; v <= 45; v += 3) g.velocities.push_back(v);
    return g;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown preset '" + name + "'");
}

kv::Entries RunConfig::entries() const {
  using kv::format_double;
  using kv::format_list;
  kv::Entries e = {{"run.seed", std::to_string(seed)}};
  auto append = [&e](const kv::Entries& more) { e.insert(e.end(), more.begin(), more.end()); };
  append(kv::describe(model.system));
  e.emplace_back("model.kind", std::string(to_string(model.kind)));
  append(describe(model.csi4cast));
  append(describe(model.rnn));
  append(describe(model.cnn));
  append(describe(train));
  append({
      {"grid.track", grid.track},
      {"grid.velocities", format_list(grid.velocities)},
      {"grid.delay_spreads_ns", format_list(grid.delay_spreads_ns)},
      {"grid.profiles", kv::format_string_list(grid.profiles)},
      {"grid.noise_types", kv::format_string_list(grid.noise_types)},
      {"grid.snr_db", format_list(grid.snr_db)},
      {"grid.drop_probs", format_list(grid.drop_probs)},
      {"grid.samples", std::to_string(grid.samples)},
      {"grid.training", kv::format_bool(grid.training)},
      {"grid.train_snr_min", format_double(grid.train_snr_min)},
      {"grid.train_snr_max", format_double(grid.train_snr_max)},
      {"eval.se_snr_db", format_double(se_snr_db)},
      {"eval.timing_reps", std::to_string(timing_reps)},
      {"eval.batch", std::to_string(eval_batch)},
      {"report.train_velocities", format_list(train_velocities)},
  });
  return e;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
  using kv::parse_double;
  using kv::parse_list;
  if (key == "run.seed") seed = kv::parse_u64(key, value);
  else if (key == "model.kind") {
    try {
      model.kind = parse_model_kind(value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidConfig, e.what());
    }
  } else if (key.starts_with("system.") || key.starts_with("model.") || key.starts_with("rnn.") ||
             key.starts_with("cnn.")) {
    model.apply(key, value);
  } else if (key.starts_with("train.")) {
    apply_train_key(train, key, value);
  } else if (key == "grid.preset") grid = grid_preset(value);
  else if (key == "grid.track") grid.track = value;
  else if (key == "grid.velocities") grid.velocities = parse_list(key, value);
  else if (key == "grid.delay_spreads_ns") grid.delay_spreads_ns = parse_list(key, value);
  else if (key == "grid.profiles") {
    grid.profiles = kv::parse_string_list(key, value);
    for (const auto& p : grid.profiles) (void)parse_profile(p);
  } else if (key == "grid.noise_types") {
    grid.noise_types = kv::parse_string_list(key, value);
    for (const auto& t : grid.noise_types) (void)parse_noise_type(t);
  } else if (key == "grid.snr_db") grid.snr_db = parse_list(key, value);
  else if (key == "grid.drop_probs") grid.drop_probs = parse_list(key, value);
  else if (key == "grid.samples") grid.samples = kv::parse_size(key, value);
  else if (key == "grid.training") grid.training = kv::parse_bool(key, value);
  else if (key == "grid.train_snr_min") grid.train_snr_min = parse_double(key, value);
  else if (key == "grid.train_snr_max") grid.train_snr_max = parse_double(key, value);
  else if (key == "eval.se_snr_db") se_snr_db = parse_double(key, value);
  else if (key == "eval.timing_reps") timing_reps = kv::parse_size(key, value);
  else if (key == "eval.batch") eval_batch = kv::parse_size(key, value);
  else if (key == "report.train_velocities") train_velocities = parse_list(key, value);
  else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    cfg.apply(key, value);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace csi4cast
