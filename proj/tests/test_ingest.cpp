// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "chembridge/data_ingest.hpp"
#include "chembridge/errors.hpp"

using namespace chembridge;
namespace ing = chembridge::ingest;
namespace fs = std::filesystem;

namespace {

const char* kHeader =
    "molecule_id,canonical_smiles,mechanism,target_id,target_name,action_type,"
    "drug_name,max_phase\n";

fs::path write_temp_csv(const std::string& name, const std::string& body,
                        const char* header = kHeader) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary);
  out << header << body;
  return p;
}

ing::DrugRecord sample_record() {
  ing::DrugRecord rec;
  rec.molecule_id = "CHEMBL25";
  rec.canonical_smiles = "CC(=O)Oc1ccccc1C(=O)O";
  rec.mechanism = "Cyclooxygenase inhibitor";
  rec.target_id = "CHEMBL221";
  rec.target_name = "Cyclooxygenase-1";
  rec.action_type = "INHIBITOR";
  rec.drug_name = "ASPIRIN";
  rec.max_phase = 4;
  return rec;
}

}  // namespace

TEST_CASE("cleaning drops empty-SMILES rows and keeps the rest") {
  auto p = write_temp_csv(
      "cb_ingest_basic.csv",
      "CHEMBL25,CC(=O)Oc1ccccc1C(=O)O,Cyclooxygenase inhibitor,CHEMBL221,COX-1,INHIBITOR,ASPIRIN,4\n"
      "CHEMBL999,,Mechanism long enough to keep,CHEMBL1,T1,INHIBITOR,X,2\n"
      "CHEMBL113,Cn1cnc2c1c(=O)n(C)c(=O)n2C,Adenosine receptor antagonist,CHEMBL226,Adenosine A1,ANTAGONIST,CAFFEINE,4\n");
  auto ds = ing::load_dataset(p, 10);
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[0].molecule_id == "CHEMBL25");
  CHECK(ds.records[1].molecule_id == "CHEMBL113");
  CHECK(ds.min_text_len == 10);
  CHECK(ing::record_id(ds.records[0]) == "CHEMBL25|CHEMBL221");
}

TEST_CASE("short mechanisms are dropped by the length threshold") {
  auto p = write_temp_csv(
      "cb_ingest_short.csv",
      "A,CCO,Inhibitor,T1,Alcohol dehydrogenase,INHIBITOR,,1\n"
      "B,CCN,A mechanism description well past the cutoff,T2,Amine oxidase,INHIBITOR,,1\n");
  auto ds = ing::load_dataset(p, 20);
  REQUIRE(ds.size() == 1);
  CHECK(ds.records[0].molecule_id == "B");

  // Everything survives when the threshold admits the short row too.
  CHECK(ing::load_dataset(p, 5).size() == 2);
}

TEST_CASE("duplicate (molecule, target) pairs keep the first occurrence") {
  auto p = write_temp_csv(
      "cb_ingest_dup.csv",
      "A,CCO,First description of the mechanism,T1,Target one,INHIBITOR,,1\n"
      "A,CCO,Second description of the mechanism,T1,Target one,AGONIST,,2\n"
      "A,CCO,Same molecule different target pair,T2,Target two,INHIBITOR,,1\n");
  auto ds = ing::load_dataset(p, 10);
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[0].action_type == "INHIBITOR");
  CHECK(ds.records[0].max_phase == 1);
  CHECK(ds.records[1].target_id == "T2");
}

TEST_CASE("field whitespace is trimmed") {
  auto p = write_temp_csv(
      "cb_ingest_trim.csv",
      "  A , CCO , Mechanism with surrounding spaces , T1 , Target , INHIBITOR , Drug ,"
      " 3 \n");
  auto ds = ing::load_dataset(p, 10);
  REQUIRE(ds.size() == 1);
  CHECK(ds.records[0].molecule_id == "A");
  CHECK(ds.records[0].canonical_smiles == "CCO");
  CHECK(ds.records[0].mechanism == "Mechanism with surrounding spaces");
  CHECK(ds.records[0].drug_name == "Drug");
  CHECK(ds.records[0].max_phase == 3);
}

TEST_CASE("schema and data errors") {
  auto missing = write_temp_csv(
      "cb_ingest_missing_col.csv", "A,CCO,Some mechanism text,T1,Target,INHIBITOR,1\n",
      "molecule_id,canonical_smiles,mechanism,target_id,target_name,action_type,max_phase\n");
  CHECK_THROWS_WITH_AS(ing::load_dataset(missing, 10),
                       doctest::Contains("drug_name"), SchemaError);

  auto bad_phase = write_temp_csv(
      "cb_ingest_bad_phase.csv",
      "A,CCO,Mechanism long enough to keep,T1,Target,INHIBITOR,,four\n");
  CHECK_THROWS_AS(ing::load_dataset(bad_phase, 10), DataError);

  auto all_dropped = write_temp_csv(
      "cb_ingest_empty.csv", "A,,Mechanism long enough to keep,T1,Target,INHIBITOR,,1\n");
  CHECK_THROWS_AS(ing::load_dataset(all_dropped, 10), DataError);

  CHECK_THROWS_AS(ing::load_dataset(fs::temp_directory_path() / "cb_does_not_exist.csv", 10),
                  IoError);
}

TEST_CASE("extra columns are ignored and order is free") {
  auto p = write_temp_csv(
      "cb_ingest_extra.csv",
      "4,A note,CC(=O)O,A,Mechanism long enough to keep,T1,Target,INHIBITOR,DrugA\n",
      "max_phase,comment,canonical_smiles,molecule_id,mechanism,target_id,target_name,"
      "action_type,drug_name\n");
  auto ds = ing::load_dataset(p, 10);
  REQUIRE(ds.size() == 1);
  CHECK(ds.records[0].canonical_smiles == "CC(=O)O");
  CHECK(ds.records[0].max_phase == 4);
}

TEST_CASE("enriched text assembly") {
  ing::DrugRecord rec;
  rec.mechanism = "Inhibitor of X";
  rec.target_name = "X kinase";
  rec.action_type = "INHIBITOR";
  rec.drug_name = "drugA";
  CHECK(ing::build_text_rich(rec, true) == "Inhibitor of X | X kinase | INHIBITOR | drugA");
  CHECK(ing::build_text_rich(rec, false) == "Inhibitor of X | X kinase | INHIBITOR");

  rec.drug_name = "";
  CHECK(ing::build_text_rich(rec, true) == "Inhibitor of X | X kinase | INHIBITOR");

  rec.action_type = "";
  CHECK(ing::build_text_rich(rec, true) == "Inhibitor of X | X kinase");

  ing::DrugRecord spaced;
  spaced.mechanism = "MEK1   protein\tkinase\ninhibitor";
  spaced.target_name = "MEK1";
  CHECK(ing::build_text_rich(spaced, false) == "MEK1 protein kinase inhibitor | MEK1");

  // Include-flag output extends the flag-off output when drug_name is set.
  auto full = sample_record();
  auto without = ing::build_text_rich(full, false);
  auto with = ing::build_text_rich(full, true);
  CHECK(with.substr(0, without.size()) == without);
}

TEST_CASE("saved datasets reload identically") {
  auto p = write_temp_csv(
      "cb_ingest_roundtrip.csv",
      "CHEMBL25,CC(=O)Oc1ccccc1C(=O)O,\"Inhibitor, irreversible, of \"\"COX\"\" enzymes\","
      "CHEMBL221,Cyclooxygenase-1,INHIBITOR,ASPIRIN,4\n"
      "CHEMBL113,Cn1cnc2c1c(=O)n(C)c(=O)n2C,Adenosine receptor antagonist,CHEMBL226,"
      "Adenosine A1,ANTAGONIST,CAFFEINE,4\n");
  auto ds = ing::load_dataset(p, 10);
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[0].mechanism == "Inhibitor, irreversible, of \"COX\" enzymes");

  fs::path out = fs::temp_directory_path() / "cb_ingest_saved.csv";
  ing::save_dataset(out, ds, true);
  auto again = ing::load_dataset(out, 10);
  CHECK(again.records == ds.records);

  std::ifstream in(out, std::ios::binary);
  std::string header_line;
  std::getline(in, header_line);
  CHECK(header_line.find("text_rich") != std::string::npos);
}
