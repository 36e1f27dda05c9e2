// Copyright 2026 The Labelopt Authors
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

#ifndef LABELOPT_CSV_HPP_
#define LABELOPT_CSV_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labelopt::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  std::optional<size_t> Column(std::string_view name) const;
  size_t RequireColumn(std::string_view name, std::string_view source) const;
};

// RFC 4180 subset: comma separated, double-quoted fields with "" escapes,
// CRLF or LF line ends. Blank lines are skipped. Rows must match the header
// width.
Table Parse(std::string_view text, std::string_view source = "<csv>");
Table ReadFile(const std::filesystem::path& path);

std::string Escape(std::string_view field);
void WriteRow(std::ostream& out, const std::vector<std::string>& fields);

// Shortest text that parses back to the same double.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text, std::string_view what);
long long ParseInt(std::string_view text, std::string_view what);

std::string ReadText(const std::filesystem::path& path);
void WriteText(const std::filesystem::path& path, std::string_view text);

}  // namespace labelopt::csv

#endif  // LABELOPT_CSV_HPP_
