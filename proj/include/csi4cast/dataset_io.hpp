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

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "csi4cast/core_types.hpp"

namespace csi4cast {

enum class DType : std::uint8_t { kComplex64 = 1, kComplex128 = 2 };

inline constexpr char kDatasetMagic[8] = {'C', 'S', 'I', '4', 'C', 'A', 'S', 'T'};
inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetFileHeader {
  std::uint32_t version = kDatasetVersion;
  SystemConfig config;
  /// Scenario shared by the file. For training-mode files the AWGN degree
  /// varies per sample and this field holds NaN.
  ScenarioDescriptor scenario;
  std::uint64_t sample_count = 0;
  DType dtype = DType::kComplex128;
};

/// Writes `ds` in the little-endian layout documented in docs/file_formats.md.
void save_dataset(const CsiDataset& ds, const std::filesystem::path& path,
                  DType dtype = DType::kComplex128);
CsiDataset load_dataset(const std::filesystem::path& path);
DatasetFileHeader read_dataset_header(const std::filesystem::path& path);

/// Scenario of the file header; noise_degree is NaN when samples disagree.
ScenarioDescriptor dataset_scenario(const CsiDataset& ds);

/// Field-wise equality that treats two NaN noise degrees as equal.
bool same_scenario(const ScenarioDescriptor& a, const ScenarioDescriptor& b);

namespace binio {
// Explicit little-endian primitives shared by the dataset and checkpoint formats.
void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
float read_f32(std::istream& is);
double read_f64(std::istream& is);
}  // namespace binio

}  // namespace csi4cast
