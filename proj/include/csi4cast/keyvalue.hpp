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

// Text encoding of config values shared by run configs and checkpoints.
// Doubles print with 17 significant digits so values round-trip exactly.

#include <string>
#include <utility>
#include <vector>

#include "csi4cast/core_types.hpp"

namespace csi4cast::kv {

using Entries = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double v);
std::string format_bool(bool v);
std::string format_list(const std::vector<double>& v);
std::string format_size_list(const std::vector<std::size_t>& v);
std::string format_string_list(const std::vector<std::string>& v);

double parse_double(const std::string& key, const std::string& value);
std::size_t parse_size(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::vector<double> parse_list(const std::string& key, const std::string& value);
std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value);
std::vector<std::string> parse_string_list(const std::string& key, const std::string& value);

/// "system.*" entries.
Entries describe(const SystemConfig& c);
/// Applies one "system.*" key; returns false when the key is not a system key.
bool apply_system_key(SystemConfig& c, const std::string& key, const std::string& value);

}  // namespace csi4cast::kv
