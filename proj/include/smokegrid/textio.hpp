// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace smokegrid {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Shortest form that reads back to the same double, capped at 17 significant digits.
std::string format_real(double v);
double parse_real(std::string_view s);
long long parse_integer(std::string_view s);

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// `key = value` lines; blank lines and `#` comments are skipped. Parsing
/// stops after a line equal to `stop_line` when one is given.
std::vector<KeyValue> read_key_values(std::istream& is, const std::string& source, std::string_view stop_line = {});
std::vector<KeyValue> read_key_values_file(const std::filesystem::path& path);

}  // namespace smokegrid
