// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chembridge::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name, -1 if absent.
  int column(std::string_view name) const;
};

// RFC-4180 reader: quoted fields, "" escapes, embedded newlines,
// CRLF or LF line endings. A header row is required and every data
// row must have the same field count.
Table read_file(const std::filesystem::path& path);
Table parse(std::string_view text, const std::string& origin = "csv");

// Minimal-quoting RFC-4180 writer (LF line endings).
std::string escape_field(std::string_view field);
void write_file(const std::filesystem::path& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace chembridge::csv
