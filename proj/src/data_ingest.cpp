// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/data_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "chembridge/csv.hpp"
#include "chembridge/errors.hpp"

namespace chembridge::ingest {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string collapse_spaces(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    bool ws = c == ' ' || c == '\t' || c == '\r' || c == '\n';
    if (ws) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

int parse_max_phase(const std::string& s, size_t row) {
  if (s.empty()) return 0;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("row " + std::to_string(row) + ": max_phase is not an integer: '" +
                    s + "'");
  }
  return v;
}

}  // namespace

std::string record_id(const DrugRecord& rec) {
  return rec.molecule_id + "|" + rec.target_id;
}

Dataset load_dataset(const std::filesystem::path& path, int min_text_len) {
  csv::Table table = csv::read_file(path);

  static const char* kColumns[] = {"molecule_id", "canonical_smiles", "mechanism",
                                   "target_id",   "target_name",      "action_type",
                                   "drug_name",   "max_phase"};
  int col[8];
  for (int c = 0; c < 8; ++c) {
    col[c] = table.column(kColumns[c]);
    if (col[c] < 0) {
      throw SchemaError(path.string() + ": missing required column '" +
                        kColumns[c] + "'");
    }
  }

  Dataset ds;
  ds.source = path.string();
  ds.min_text_len = min_text_len;
  std::set<std::pair<std::string, std::string>> seen_pairs;

  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    DrugRecord rec;
    rec.molecule_id = trim(row[static_cast<size_t>(col[0])]);
    rec.canonical_smiles = trim(row[static_cast<size_t>(col[1])]);
    rec.mechanism = trim(row[static_cast<size_t>(col[2])]);
    rec.target_id = trim(row[static_cast<size_t>(col[3])]);
    rec.target_name = trim(row[static_cast<size_t>(col[4])]);
    rec.action_type = trim(row[static_cast<size_t>(col[5])]);
    rec.drug_name = trim(row[static_cast<size_t>(col[6])]);
    rec.max_phase = parse_max_phase(trim(row[static_cast<size_t>(col[7])]), r + 2);

    if (rec.canonical_smiles.empty()) continue;
    if (static_cast<int>(rec.mechanism.size()) < min_text_len) continue;
    if (!seen_pairs.insert({rec.molecule_id, rec.target_id}).second) continue;
    ds.records.push_back(std::move(rec));
  }

  if (ds.records.empty()) {
    throw DataError(path.string() + ": no records survive cleaning");
  }
  return ds;
}

std::string build_text_rich(const DrugRecord& rec, bool include_drug_name) {
  std::string out;
  auto append = [&](const std::string& part) {
    std::string clean = collapse_spaces(part);
    if (clean.empty()) return;
    if (!out.empty()) out += " | ";
    out += clean;
  };
  append(rec.mechanism);
  append(rec.target_name);
  append(rec.action_type);
  if (include_drug_name) append(rec.drug_name);
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds,
                  bool include_drug_name) {
  std::vector<std::string> header = {"molecule_id", "canonical_smiles", "mechanism",
                                     "target_id",   "target_name",      "action_type",
                                     "drug_name",   "max_phase",        "text_rich"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    rows.push_back({rec.molecule_id, rec.canonical_smiles, rec.mechanism, rec.target_id,
                    rec.target_name, rec.action_type, rec.drug_name,
                    std::to_string(rec.max_phase), build_text_rich(rec, include_drug_name)});
  }
  csv::write_file(path, header, rows);
}

}  // namespace chembridge::ingest
