// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace chembridge::ingest {

// One drug-target pair. molecule_id/target_id identify the pair;
// action_type and drug_name may be empty.
struct DrugRecord {
  std::string molecule_id;
  std::string canonical_smiles;
  std::string mechanism;
  std::string target_id;
  std::string target_name;
  std::string action_type;
  std::string drug_name;
  int max_phase = 0;

  bool operator==(const DrugRecord&) const = default;
};

struct Dataset {
  std::vector<DrugRecord> records;
  std::string source;
  int min_text_len = 0;

  int size() const { return static_cast<int>(records.size()); }
};

// Unique join key used by embedding files: "<molecule_id>|<target_id>".
std::string record_id(const DrugRecord& rec);

// Loads and cleans a ChEMBL-style CSV. Rows with an empty SMILES or a
// mechanism shorter than min_text_len are dropped; duplicate
// (molecule_id, target_id) pairs keep the first occurrence. All
// DrugRecord columns must be present (extra columns are ignored).
Dataset load_dataset(const std::filesystem::path& path, int min_text_len = 20);

// "mechanism | target_name | action_type [| drug_name]" with runs of
// whitespace collapsed; empty components are skipped so no dangling
// separators appear.
std::string build_text_rich(const DrugRecord& rec, bool include_drug_name);

// Writes the cleaned dataset with a trailing text_rich column. Loading
// the output again (same min_text_len) reproduces the dataset.
void save_dataset(const std::filesystem::path& path, const Dataset& ds,
                  bool include_drug_name);

}  // namespace chembridge::ingest
