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

#include "csi4cast/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace csi4cast {

namespace binio {
namespace {
template <typename U>
void write_le(std::ostream& os, U v) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes, sizeof(U));
}

template <typename U>
U read_le(std::istream& is) {
  unsigned char bytes[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(ErrorCode::kIoError, "unexpected end of file");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}
}  // namespace

void write_u8(std::ostream& os, std::uint8_t v) { write_le(os, v); }
void write_u32(std::ostream& os, std::uint32_t v) { write_le(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_le(os, v); }
void write_f32(std::ostream& os, float v) { write_le(os, std::bit_cast<std::uint32_t>(v)); }
void write_f64(std::ostream& os, double v) { write_le(os, std::bit_cast<std::uint64_t>(v)); }
std::uint8_t read_u8(std::istream& is) { return read_le<std::uint8_t>(is); }
std::uint32_t read_u32(std::istream& is) { return read_le<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return read_le<std::uint64_t>(is); }
float read_f32(std::istream& is) { return std::bit_cast<float>(read_le<std::uint32_t>(is)); }
double read_f64(std::istream& is) { return std::bit_cast<double>(read_le<std::uint64_t>(is)); }
}  // namespace binio

namespace {

using namespace binio;

void write_config(std::ostream& os, const SystemConfig& c) {
  write_u32(os, static_cast<std::uint32_t>(c.n_tx));
  write_u32(os, static_cast<std::uint32_t>(c.n_rx));
  write_u32(os, static_cast<std::uint32_t>(c.n_sc));
  write_u32(os, static_cast<std::uint32_t>(c.n_guard));
  write_u32(os, static_cast<std::uint32_t>(c.hist_len));
  write_u32(os, static_cast<std::uint32_t>(c.pred_len));
  write_f64(os, c.carrier_freq);
  write_f64(os, c.sc_spacing);
  write_f64(os, c.report_interval);
  write_u8(os, static_cast<std::uint8_t>(c.duplex));
}

SystemConfig read_config(std::istream& is) {
  SystemConfig c;
  c.n_tx = read_u32(is);
  c.n_rx = read_u32(is);
  c.n_sc = read_u32(is);
  c.n_guard = read_u32(is);
  c.hist_len = read_u32(is);
  c.pred_len = read_u32(is);
  c.carrier_freq = read_f64(is);
  c.sc_spacing = read_f64(is);
  c.report_interval = read_f64(is);
  c.duplex = static_cast<Duplex>(read_u8(is));
  return c;
}

void write_scenario(std::ostream& os, const ScenarioDescriptor& s) {
  write_f64(os, s.velocity);
  write_f64(os, s.delay_spread);
  write_u8(os, static_cast<std::uint8_t>(s.channel_profile));
  write_u8(os, static_cast<std::uint8_t>(s.noise_type));
  write_f64(os, s.noise_degree);
  write_u8(os, static_cast<std::uint8_t>(s.duplex));
}

ScenarioDescriptor read_scenario(std::istream& is) {
  ScenarioDescriptor s;
  s.velocity = read_f64(is);
  s.delay_spread = read_f64(is);
  s.channel_profile = static_cast<ChannelProfile>(read_u8(is));
  s.noise_type = static_cast<NoiseType>(read_u8(is));
  s.noise_degree = read_f64(is);
  s.duplex = static_cast<Duplex>(read_u8(is));
  return s;
}

void write_tensor(std::ostream& os, const CsiSequence& seq, DType dtype) {
  const std::size_t width = dtype == DType::kComplex64 ? 4 : 8;
  std::vector<char> buf(seq.numel() * 2 * width);
  char* p = buf.data();
  auto put = [&](double v) {
    if (dtype == DType::kComplex64) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int i = 0; i < 4; ++i) *p++ = static_cast<char>((bits >> (8 * i)) & 0xFF);
    } else {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) *p++ = static_cast<char>((bits >> (8 * i)) & 0xFF);
    }
  };
  for (const auto& v : seq.data()) {
    put(v.real());
    put(v.imag());
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_tensor(std::istream& is, CsiSequence& seq, DType dtype) {
  const std::size_t width = dtype == DType::kComplex64 ? 4 : 8;
  std::vector<unsigned char> buf(seq.numel() * 2 * width);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw Error(ErrorCode::kIoError, "truncated tensor data");
  }
  const unsigned char* p = buf.data();
  auto get = [&]() -> double {
    if (dtype == DType::kComplex64) {
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(*p++) << (8 * i);
      return static_cast<double>(std::bit_cast<float>(bits));
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(*p++) << (8 * i);
    return std::bit_cast<double>(bits);
  };
  for (auto& v : seq.data()) {
    const double re = get();
    const double im = get();
    v = {re, im};
  }
}

DatasetFileHeader read_header(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8)) throw Error(ErrorCode::kIoError, "file too short for header");
  if (std::memcmp(magic, kDatasetMagic, 8) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a CSI4CAST dataset file");
  }
  DatasetFileHeader h;
  h.version = read_u32(is);
  if (h.version != kDatasetVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "dataset version " + std::to_string(h.version));
  }
  h.config = read_config(is);
  h.scenario = read_scenario(is);
  h.sample_count = read_u64(is);
  const auto dtype = read_u8(is);
  if (dtype != 1 && dtype != 2) throw Error(ErrorCode::kIoError, "unknown dtype code");
  h.dtype = static_cast<DType>(dtype);
  return h;
}

}  // namespace

bool same_scenario(const ScenarioDescriptor& a, const ScenarioDescriptor& b) {
  const bool degree_equal = (std::isnan(a.noise_degree) && std::isnan(b.noise_degree)) ||
                            a.noise_degree == b.noise_degree;
  return a.velocity == b.velocity && a.delay_spread == b.delay_spread &&
         a.channel_profile == b.channel_profile && a.noise_type == b.noise_type &&
         a.duplex == b.duplex && degree_equal;
}

ScenarioDescriptor dataset_scenario(const CsiDataset& ds) {
  if (ds.samples.empty()) return {};
  ScenarioDescriptor s = ds.samples.front().scenario;
  for (const auto& sample : ds.samples) {
    if (sample.scenario.noise_degree != s.noise_degree) {
      s.noise_degree = std::numeric_limits<double>::quiet_NaN();
      break;
    }
  }
  return s;
}

void save_dataset(const CsiDataset& ds, const std::filesystem::path& path, DType dtype) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  os.write(kDatasetMagic, 8);
  write_u32(os, kDatasetVersion);
  write_config(os, ds.config);
  write_scenario(os, dataset_scenario(ds));
  write_u64(os, ds.samples.size());
  write_u8(os, static_cast<std::uint8_t>(dtype));
  for (const auto& s : ds.samples) {
    write_u64(os, s.seed);
    write_f64(os, s.scenario.noise_degree);
    write_tensor(os, s.history, dtype);
    write_tensor(os, s.target, dtype);
  }
  if (!os) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

DatasetFileHeader read_dataset_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_header(is);
}

CsiDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const DatasetFileHeader h = read_header(is);
  const SystemConfig& c = h.config;
  CsiDataset ds;
  ds.config = c;
  ds.samples.resize(h.sample_count);
  for (auto& s : ds.samples) {
    s.seed = read_u64(is);
    s.scenario = h.scenario;
    s.scenario.noise_degree = read_f64(is);
    s.history = CsiSequence(c.n_tx, c.hist_len, c.n_sc);
    s.history.set_uniform_timestamps(0.0, c.report_interval);
    s.target = CsiSequence(c.n_tx, c.pred_len, c.n_sc);
    s.target.set_uniform_timestamps(static_cast<double>(c.hist_len) * c.report_interval,
                                    c.report_interval);
    read_tensor(is, s.history, h.dtype);
    read_tensor(is, s.target, h.dtype);
  }
  return ds;
}

}  // namespace csi4cast
