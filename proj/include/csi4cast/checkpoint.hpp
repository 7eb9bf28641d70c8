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
#include <memory>

#include "csi4cast/baselines.hpp"
#include "csi4cast/keyvalue.hpp"
#include "csi4cast/model.hpp"

namespace csi4cast {

/// Everything needed to rebuild a predictor's architecture.
struct ModelSpec {
  ModelKind kind = ModelKind::kCsi4Cast;
  SystemConfig system;
  Csi4CastConfig csi4cast;
  RnnConfig rnn;
  CnnConfig cnn;

  /// system.* keys followed by the keys of the selected architecture.
  kv::Entries describe() const;
  /// Accepts system.*, model.*, rnn.* and cnn.* keys.
  void apply(const std::string& key, const std::string& value);
};

std::unique_ptr<Predictor> make_predictor(const ModelSpec& spec, std::uint64_t seed);

inline constexpr char kCheckpointMagic[8] = {'C', '4', 'C', 'M', 'O', 'D', 'E', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes architecture keys and every parameter and buffer, bit-exact.
void save_checkpoint(const Predictor& model, const std::filesystem::path& path);
std::unique_ptr<Predictor> load_checkpoint(const std::filesystem::path& path);

}  // namespace csi4cast
