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

#include "csi4cast/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "csi4cast/dataset_io.hpp"

namespace csi4cast {

kv::Entries ModelSpec::describe() const {
  kv::Entries e = kv::describe(system);
  kv::Entries m;
  switch (kind) {
    case ModelKind::kCsi4Cast: m = csi4cast::describe(csi4cast); break;
    case ModelKind::kRnn: m = csi4cast::describe(rnn); break;
    case ModelKind::kCnn: m = csi4cast::describe(cnn); break;
    case ModelKind::kNp: break;
  }
  e.insert(e.end(), m.begin(), m.end());
  return e;
}

void ModelSpec::apply(const std::string& key, const std::string& value) {
  if (kv::apply_system_key(system, key, value)) return;
  if (key.starts_with("model.")) apply_model_key(csi4cast, key, value);
  else if (key.starts_with("rnn.")) apply_rnn_key(rnn, key, value);
  else if (key.starts_with("cnn.")) apply_cnn_key(cnn, key, value);
  else throw Error(ErrorCode::kInvalidConfig, "unknown key " + key);
}

std::unique_ptr<Predictor> make_predictor(const ModelSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::kCsi4Cast:
      return std::make_unique<Csi4CastModel>(spec.csi4cast, spec.system, seed);
    case ModelKind::kRnn: return std::make_unique<RnnBaseline>(spec.rnn, spec.system, seed);
    case ModelKind::kCnn: return std::make_unique<CnnBaseline>(spec.cnn, spec.system, seed);
    case ModelKind::kNp: return std::make_unique<NpBaseline>(spec.system);
  }
  throw Error(ErrorCode::kConfigError, "unknown model kind");
}

namespace {

void write_string(std::ostream& os, const std::string& s) {
  binio::write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const std::uint32_t n = binio::read_u32(is);
  if (n > (1u << 20)) throw Error(ErrorCode::kIoError, "checkpoint string too long");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw Error(ErrorCode::kIoError, "truncated checkpoint");
  return s;
}

}  // namespace

void save_checkpoint(const Predictor& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  binio::write_u32(os, kCheckpointVersion);
  binio::write_u8(os, static_cast<std::uint8_t>(model.kind()));

  kv::Entries entries = kv::describe(model.system());
  const auto arch = model.describe();
  entries.insert(entries.end(), arch.begin(), arch.end());
  binio::write_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [k, v] : entries) {
    write_string(os, k);
    write_string(os, v);
  }

  const auto params = model.parameters().all();
  binio::write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const nn::Parameter* p : params) {
    write_string(os, p->name);
    binio::write_u8(os, p->buffer ? 1 : 0);
    binio::write_u32(os, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape) binio::write_u64(os, d);
    for (double v : p->value.data) binio::write_f64(os, v);
  }
  if (!os) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::unique_ptr<Predictor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kBadMagic, path.string() + " is not a checkpoint");
  }
  const std::uint32_t version = binio::read_u32(is);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "checkpoint version " + std::to_string(version));
  }
  const std::uint8_t kind = binio::read_u8(is);
  if (kind > static_cast<std::uint8_t>(ModelKind::kNp)) {
    throw Error(ErrorCode::kIoError, "unknown model kind tag");
  }
  ModelSpec spec;
  spec.kind = static_cast<ModelKind>(kind);
  const std::uint32_t n_entries = binio::read_u32(is);
  for (std::uint32_t i = 0; i < n_entries; ++i) {
    const std::string k = read_string(is);
    const std::string v = read_string(is);
    spec.apply(k, v);
  }
  auto model = make_predictor(spec, 0);

  const std::uint32_t n_params = binio::read_u32(is);
  if (n_params != model->parameters().size()) {
    throw Error(ErrorCode::kDimensionMismatch, "checkpoint parameter count differs");
  }
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::string name = read_string(is);
    nn::Parameter* p = model->parameters().find(name);
    if (p == nullptr) throw Error(ErrorCode::kDimensionMismatch, "unknown parameter " + name);
    const bool buffer = binio::read_u8(is) != 0;
    const std::uint32_t rank = binio::read_u32(is);
    nn::Shape shape(rank);
    for (auto& d : shape) d = binio::read_u64(is);
    if (shape != p->value.shape || buffer != p->buffer) {
      throw Error(ErrorCode::kDimensionMismatch, "parameter " + name + " has shape " +
                                                     nn::shape_string(shape));
    }
    for (double& v : p->value.data) v = binio::read_f64(is);
  }
  return model;
}

}  // namespace csi4cast
