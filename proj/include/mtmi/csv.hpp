// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Minimal CSV plumbing shared by every on-disk format: comma separated,
// '.' decimal mark, LF line endings, optional double quotes around a field.
namespace mtmi::csv {

std::vector<std::string> split_line(std::string_view line);

// Quotes the field when it contains a comma, quote or newline.
std::string quote(std::string_view field);

// 17 significant digits, so every double round-trips exactly.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Line reader that strips a trailing '\r' and counts lines from 1.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  bool next(std::string& line);
  std::size_t line_number() const { return line_number_; }

 private:
  std::ifstream in_;
  std::size_t line_number_ = 0;
};

// Opens `path` for binary writing; throws IoError on failure.
std::ofstream open_for_write(const std::string& path);

}  // namespace mtmi::csv
