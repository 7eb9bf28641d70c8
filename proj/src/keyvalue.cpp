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

#include "csi4cast/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace csi4cast::kv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> out;
  const std::string v = trim(value);
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::kInvalidConfig, key + ": cannot parse '" + value + "' as " + what);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_bool(bool v) { return v ? "true" : "false"; }

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string format_size_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string format_string_list(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (v == "inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad(key, value, "a number");
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad(key, value, "a nonnegative integer");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, value, "a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_commas(value)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_commas(value)) out.push_back(parse_size(key, item));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& key, const std::string& value) {
  (void)key;
  return split_commas(value);
}

Entries describe(const SystemConfig& c) {
  return {
      {"system.n_tx", std::to_string(c.n_tx)},
      {"system.n_rx", std::to_string(c.n_rx)},
      {"system.n_sc", std::to_string(c.n_sc)},
      {"system.n_guard", std::to_string(c.n_guard)},
      {"system.hist_len", std::to_string(c.hist_len)},
      {"system.pred_len", std::to_string(c.pred_len)},
      {"system.carrier_freq", format_double(c.carrier_freq)},
      {"system.sc_spacing", format_double(c.sc_spacing)},
      {"system.report_interval", format_double(c.report_interval)},
      {"system.duplex", std::string(to_string(c.duplex))},
  };
}

bool apply_system_key(SystemConfig& c, const std::string& key, const std::string& value) {
  if (key == "system.n_tx") c.n_tx = parse_size(key, value);
  else if (key == "system.n_rx") c.n_rx = parse_size(key, value);
  else if (key == "system.n_sc") c.n_sc = parse_size(key, value);
  else if (key == "system.n_guard") c.n_guard = parse_size(key, value);
  else if (key == "system.hist_len") c.hist_len = parse_size(key, value);
  else if (key == "system.pred_len") c.pred_len = parse_size(key, value);
  else if (key == "system.carrier_freq") c.carrier_freq = parse_double(key, value);
  else if (key == "system.sc_spacing") c.sc_spacing = parse_double(key, value);
  else if (key == "system.report_interval") c.report_interval = parse_double(key, value);
  else if (key == "system.duplex") c.duplex = parse_duplex(trim(value));
  else return false;
  return true;
}

}  // namespace csi4cast::kv
