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

#include "labelopt/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "labelopt/error.hpp"

namespace labelopt::csv {

std::optional<size_t> Table::Column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

size_t Table::RequireColumn(std::string_view name, std::string_view source) const {
  auto col = Column(name);
  Require(col.has_value(), ErrorCode::kParse,
          std::string(source) + ": missing column '" + std::string(name) + "'");
  return *col;
}

Table Parse(std::string_view text, std::string_view source) {
  Table table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  int line = 1;
  int row_line = 1;

  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    const bool blank = row.size() == 1 && row[0].empty() && !field_started;
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(row);
      } else {
        Require(row.size() == table.header.size(), ErrorCode::kParse,
                std::string(source) + ":" + std::to_string(row_line) + ": expected " +
                    std::to_string(table.header.size()) + " fields, got " +
                    std::to_string(row.size()));
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(row_line);
      }
    }
    row.clear();
    field_started = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        Require(field.empty(), ErrorCode::kParse,
                std::string(source) + ":" + std::to_string(line) + ": stray quote");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  Require(!in_quotes, ErrorCode::kParse, std::string(source) + ": unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  Require(!table.header.empty(), ErrorCode::kParse, std::string(source) + ": empty file");
  // Tolerate a UTF-8 byte order mark on the first header cell.
  if (table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) table.header[0].erase(0, 3);
  return table;
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteText(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  Require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

Table ReadFile(const std::filesystem::path& path) {
  return Parse(ReadText(path), path.string());
}

std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void WriteRow(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << Escape(fields[i]);
  }
  out << '\n';
}

std::string FormatDouble(double value) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

double ParseDouble(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  Require(!text.empty() && result.ec == std::errc() && result.ptr == text.data() + text.size(),
          ErrorCode::kParse, std::string(what) + ": '" + std::string(text) + "' is not a number");
  return value;
}

long long ParseInt(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  long long value = 0;
  auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  Require(!text.empty() && result.ec == std::errc() && result.ptr == text.data() + text.size(),
          ErrorCode::kParse, std::string(what) + ": '" + std::string(text) + "' is not an integer");
  return value;
}

}  // namespace labelopt::csv
