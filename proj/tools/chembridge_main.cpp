// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0
//
// File-staged pipeline driver. Every subcommand is a pure function of its
// input files, flags and seed, and drops a .manifest.json next to each
// output so runs can be audited and reproduced.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"

#include "chembridge/bridge.hpp"
#include "chembridge/csv.hpp"
#include "chembridge/data_ingest.hpp"
#include "chembridge/errors.hpp"
#include "chembridge/eval.hpp"
#include "chembridge/fingerprint.hpp"
#include "chembridge/manifest.hpp"
#include "chembridge/scaffold.hpp"
#include "chembridge/smiles.hpp"
#include "chembridge/text_embed.hpp"

namespace fs = std::filesystem;
using chembridge::DataError;
using chembridge::SchemaError;

namespace {

// Flag default: CHEMBRIDGE_SEED if set, else 0. --seed overrides.
uint64_t env_seed() {
  const char* env = std::getenv("CHEMBRIDGE_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw DataError(std::string("CHEMBRIDGE_SEED is not an unsigned integer: ") + env);
  return v;
}

chembridge::smiles::SaltPolicy salt_policy_from(const std::string& name) {
  if (name == "largest") return chembridge::smiles::SaltPolicy::KeepLargest;
  if (name == "all") return chembridge::smiles::SaltPolicy::KeepAll;
  throw DataError("unknown salt policy: " + name);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Parses one molecule per record, wrapping parse failures with the row
// number and molecule id so CSV problems are reported against the file.
std::vector<chembridge::smiles::MoleculeGraph> parse_all(
    const chembridge::ingest::Dataset& ds, chembridge::smiles::SaltPolicy policy) {
  std::vector<chembridge::smiles::MoleculeGraph> graphs;
  graphs.reserve(ds.records.size());
  for (int i = 0; i < ds.size(); ++i) {
    const auto& rec = ds.records[i];
    try {
      graphs.push_back(chembridge::smiles::parse_smiles(rec.canonical_smiles, policy));
    } catch (const chembridge::Error& e) {
      throw DataError("record " + std::to_string(i) + " (" + rec.molecule_id +
                      "): bad SMILES: " + e.what());
    }
  }
  return graphs;
}

struct SplitTable {
  std::vector<int> train;
  std::vector<int> test;
};

// Joins a split CSV back to the dataset. The file must cover the dataset
// exactly; subset selection then happens by name.
SplitTable read_split(const fs::path& path, const chembridge::ingest::Dataset& ds) {
  const auto table = chembridge::csv::read_file(path);
  const int id_col = table.column("record_id");
  const int subset_col = table.column("subset");
  if (id_col < 0 || subset_col < 0)
    throw SchemaError(path.string() + ": expected columns record_id and subset");

  std::unordered_map<std::string, std::string> subset_of;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& id = table.rows[r][id_col];
    const std::string& subset = table.rows[r][subset_col];
    if (subset != "train" && subset != "test")
      throw DataError(path.string() + ": row " + std::to_string(r) + ": bad subset '" +
                      subset + "'");
    if (!subset_of.emplace(id, subset).second)
      throw DataError(path.string() + ": duplicate record id " + id);
  }

  SplitTable out;
  for (int i = 0; i < ds.size(); ++i) {
    const std::string id = chembridge::ingest::record_id(ds.records[i]);
    auto it = subset_of.find(id);
    if (it == subset_of.end())
      throw DataError(path.string() + ": no subset for record " + id);
    (it->second == "train" ? out.train : out.test).push_back(i);
    subset_of.erase(it);
  }
  if (!subset_of.empty())
    throw DataError(path.string() + ": unknown record id " + subset_of.begin()->first);
  return out;
}

std::vector<int> pick_subset(const SplitTable& split, const std::string& which, int n) {
  if (which == "train") return split.train;
  if (which == "test") return split.test;
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  return all;
}

chembridge::embed::MatrixF take_rows(const chembridge::embed::MatrixF& m,
                                     const std::vector<int>& rows) {
  chembridge::embed::MatrixF out(static_cast<int>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<int>(i)) = m.row(rows[i]);
  return out;
}

std::vector<std::string> take_targets(const chembridge::ingest::Dataset& ds,
                                      const std::vector<int>& rows) {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (int r : rows) ids.push_back(ds.records[r].target_id);
  return ids;
}

std::vector<std::string> take_record_ids(const chembridge::ingest::Dataset& ds,
                                         const std::vector<int>& rows) {
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (int r : rows) ids.push_back(chembridge::ingest::record_id(ds.records[r]));
  return ids;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareArgs {
  std::string in, out;
  int min_text_len = 20;
  bool with_drug_name = true;
};

void cmd_prepare(const PrepareArgs& a) {
  const auto ds = chembridge::ingest::load_dataset(a.in, a.min_text_len);
  chembridge::ingest::save_dataset(a.out, ds, a.with_drug_name);
  chembridge::manifest::write_manifest(
      a.out, "prepare",
      {{"min_text_len", std::to_string(a.min_text_len)},
       {"with_drug_name", a.with_drug_name ? "true" : "false"}},
      0, {{"input", a.in}});
  std::printf("prepare: %d records -> %s\n", ds.size(), a.out.c_str());
}

// ---------------------------------------------------------------------------
// fingerprint

struct FingerprintArgs {
  std::string in, out;
  int radius = 2;
  int nbits = 2048;
  std::string salt_policy = "largest";
};

void cmd_fingerprint(const FingerprintArgs& a) {
  const auto ds = chembridge::ingest::load_dataset(a.in, 0);
  const auto graphs = parse_all(ds, salt_policy_from(a.salt_policy));

  chembridge::embed::EmbeddingMatrix m;
  m.values.resize(ds.size(), a.nbits);
  m.values.setZero();
  for (int i = 0; i < ds.size(); ++i) {
    const auto fp = chembridge::fp::ecfp(graphs[i], a.radius, a.nbits);
    for (int b = 0; b < a.nbits; ++b)
      if (fp.test(static_cast<uint32_t>(b))) m.values(i, b) = 1.0f;
    m.row_ids.push_back(chembridge::ingest::record_id(ds.records[i]));
  }
  chembridge::embed::write_emb1(a.out, m);
  chembridge::manifest::write_manifest(a.out, "fingerprint",
                                       {{"radius", std::to_string(a.radius)},
                                        {"nbits", std::to_string(a.nbits)},
                                        {"salt_policy", a.salt_policy}},
                                       0, {{"input", a.in}});
  std::printf("fingerprint: %d x %d bits -> %s\n", ds.size(), a.nbits, a.out.c_str());
}

// ---------------------------------------------------------------------------
// embed

struct EmbedArgs {
  std::string in, out;
  int dim = 1024;
};

void cmd_embed(const EmbedArgs& a) {
  const auto table = chembridge::csv::read_file(a.in);
  const int text_col = table.column("text_rich");
  const int mol_col = table.column("molecule_id");
  const int target_col = table.column("target_id");
  if (text_col < 0)
    throw SchemaError(a.in + ": missing column 'text_rich' (run prepare first)");
  if (mol_col < 0 || target_col < 0)
    throw SchemaError(a.in + ": missing molecule_id/target_id columns");

  chembridge::embed::EmbeddingMatrix m;
  m.values.resize(static_cast<int>(table.rows.size()), a.dim);
  for (size_t r = 0; r < table.rows.size(); ++r) {
    try {
      m.values.row(static_cast<int>(r)) =
          chembridge::embed::hash_embed(table.rows[r][text_col], a.dim).transpose();
    } catch (const chembridge::Error& e) {
      throw DataError(a.in + ": row " + std::to_string(r) + ": " + e.what());
    }
    m.row_ids.push_back(table.rows[r][mol_col] + "|" + table.rows[r][target_col]);
  }
  chembridge::embed::write_emb1(a.out, m);
  chembridge::manifest::write_manifest(a.out, "embed", {{"dim", std::to_string(a.dim)}}, 0,
                                       {{"input", a.in}});
  std::printf("embed: %zu x %d -> %s\n", table.rows.size(), a.dim, a.out.c_str());
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string in, out;
  std::string mode = "scaffold";
  double test_frac = 0.2;
  uint64_t seed = 0;
  std::string salt_policy = "largest";
};

void cmd_split(const SplitArgs& a) {
  const auto ds = chembridge::ingest::load_dataset(a.in, 0);
  const auto graphs = parse_all(ds, salt_policy_from(a.salt_policy));

  std::vector<chembridge::scaffold::ScaffoldKey> keys;
  keys.reserve(graphs.size());
  for (const auto& g : graphs)
    keys.push_back(chembridge::scaffold::scaffold_key(chembridge::scaffold::murcko_scaffold(g)));

  const auto assignment = a.mode == "scaffold"
                              ? chembridge::scaffold::scaffold_split(keys, a.test_frac, a.seed)
                              : chembridge::scaffold::random_split(ds.size(), a.test_frac, a.seed);
  std::vector<std::string> subset(ds.records.size(), "train");
  for (int i : assignment.test_indices) subset[i] = "test";

  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < ds.size(); ++i)
    rows.push_back({chembridge::ingest::record_id(ds.records[i]), keys[i].str(), subset[i]});
  chembridge::csv::write_file(a.out, {"record_id", "scaffold_key", "subset"}, rows);
  chembridge::manifest::write_manifest(a.out, "split",
                                       {{"mode", a.mode},
                                        {"test_frac", fmt(a.test_frac)},
                                        {"salt_policy", a.salt_policy}},
                                       a.seed, {{"input", a.in}});
  std::printf("split: %zu train / %zu test (%s, frac %.2f) -> %s\n",
              assignment.train_indices.size(), assignment.test_indices.size(), a.mode.c_str(),
              a.test_frac, a.out.c_str());
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string mol, text, csv, split, out, history;
  chembridge::bridge::TrainConfig cfg;
};

std::map<std::string, std::string> config_flags(const chembridge::bridge::TrainConfig& c) {
  return {{"dim", std::to_string(c.dim)},
          {"temperature", fmt(c.temperature)},
          {"lr", fmt(c.lr)},
          {"weight_decay", fmt(c.weight_decay)},
          {"epochs", std::to_string(c.epochs)},
          {"batch_size", std::to_string(c.batch_size)},
          {"beta", fmt(c.hard_negative_beta)},
          {"margin", fmt(c.margin)},
          {"margin_weight", fmt(c.margin_weight)}};
}

void cmd_train(const TrainArgs& a) {
  const auto ds = chembridge::ingest::load_dataset(a.csv, 0);
  const auto mol = chembridge::embed::load_embeddings(a.mol, ds);
  const auto text = chembridge::embed::load_embeddings(a.text, ds);
  const auto split = read_split(a.split, ds);
  if (split.train.size() < 2)
    throw DataError("train subset has " + std::to_string(split.train.size()) +
                    " records; need at least 2");

  const auto mol_X = take_rows(mol.values, split.train);
  const auto text_Z = take_rows(text.values, split.train);
  const auto targets = take_targets(ds, split.train);

  const auto [params, history] = chembridge::bridge::train(mol_X, text_Z, targets, a.cfg);
  chembridge::bridge::save_params(a.out, params, a.cfg);

  const fs::path hist_path =
      a.history.empty() ? fs::path(a.out).parent_path() / "history.csv" : fs::path(a.history);
  std::vector<std::vector<std::string>> rows;
  for (size_t e = 0; e < history.loss.size(); ++e) {
    char loss[32], nce[32], mar[32];
    std::snprintf(loss, sizeof(loss), "%.9g", history.loss[e]);
    std::snprintf(nce, sizeof(nce), "%.9g", history.infonce[e]);
    std::snprintf(mar, sizeof(mar), "%.9g", history.margin[e]);
    rows.push_back({std::to_string(e), loss, nce, mar});
  }
  chembridge::csv::write_file(hist_path, {"epoch", "loss", "infonce", "margin"}, rows);

  auto flags = config_flags(a.cfg);
  flags["history"] = hist_path.string();
  chembridge::manifest::write_manifest(a.out, "train", flags, a.cfg.seed,
                                       {{"mol", a.mol},
                                        {"text", a.text},
                                        {"dataset", a.csv},
                                        {"split", a.split}});
  if (history.loss.empty())
    std::printf("train: %zu pairs, 0 epochs (checkpoint = init) -> %s\n", split.train.size(),
                a.out.c_str());
  else
    std::printf("train: %zu pairs, %d epochs, final loss %.6f -> %s\n", split.train.size(),
                a.cfg.epochs, history.loss.back(), a.out.c_str());
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string bridge, mol, text, csv, split, out, cmc, sim;
  std::string subset = "test";
  int k_max = 10;
  int bootstrap = 1000;
  int export_sim = 0;
  int min_group = 3;
  uint64_t seed = 0;
};

void cmd_eval(const EvalArgs& a) {
  const auto [params, train_cfg] = chembridge::bridge::load_params(a.bridge);
  const auto ds = chembridge::ingest::load_dataset(a.csv, 0);
  const auto mol = chembridge::embed::load_embeddings(a.mol, ds);
  const auto text = chembridge::embed::load_embeddings(a.text, ds);
  const auto split = read_split(a.split, ds);

  const auto rows = pick_subset(split, a.subset, ds.size());
  if (rows.size() < 2)
    throw DataError("subset '" + a.subset + "' has " + std::to_string(rows.size()) +
                    " records; need at least 2");
  const auto B_T = chembridge::bridge::project(params.W_T, take_rows(text.values, rows));
  const auto B_M = chembridge::bridge::project(params.W_M, take_rows(mol.values, rows));
  const auto targets = take_targets(ds, rows);

  const int n = static_cast<int>(rows.size());
  const int k_max = std::min(a.k_max, n);
  const auto report = chembridge::eval::build_report(B_T, B_M, targets, a.bootstrap, a.seed,
                                                     a.min_group, k_max);
  chembridge::eval::save_report(a.out, report);

  const fs::path cmc_path =
      a.cmc.empty() ? fs::path(a.out).parent_path() / "cmc.csv" : fs::path(a.cmc);
  chembridge::eval::save_cmc_csv(cmc_path, report);

  std::map<std::string, std::string> flags{{"subset", a.subset},
                                           {"k_max", std::to_string(k_max)},
                                           {"bootstrap", std::to_string(a.bootstrap)},
                                           {"min_group", std::to_string(a.min_group)},
                                           {"cmc", cmc_path.string()}};
  if (a.export_sim > 0) {
    const auto S = chembridge::eval::similarity_matrix(B_T, B_M);
    const auto ids = take_record_ids(ds, rows);
    const fs::path sim_path =
        a.sim.empty() ? fs::path(a.out).parent_path() / "sim.csv" : fs::path(a.sim);
    chembridge::eval::export_simmatrix(S, a.export_sim, ids, ids, sim_path);
    flags["export_sim"] = std::to_string(a.export_sim);
    flags["sim"] = sim_path.string();
  }
  chembridge::manifest::write_manifest(a.out, "eval", flags, a.seed,
                                       {{"bridge", a.bridge},
                                        {"mol", a.mol},
                                        {"text", a.text},
                                        {"dataset", a.csv},
                                        {"split", a.split}});
  (void)train_cfg;
  std::printf("eval: %d queries (%s), text->mol R@1 %.3f MRR %.3f -> %s\n", n,
              a.subset.c_str(), report.text_to_mol.recall_at.begin()->second,
              report.text_to_mol.mrr, a.out.c_str());
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
  std::string mol, csv, split, out;
  std::vector<double> temps{0.05, 0.07};
  std::vector<double> margins{0.0, 0.15};
  std::vector<std::string> drugname{"on", "off"};
  int embed_dim = 1024;
  std::string subset = "test";
  int bootstrap = 200;
  int min_group = 3;
  chembridge::bridge::TrainConfig cfg;
};

void cmd_ablate(const AblateArgs& a) {
  const auto ds = chembridge::ingest::load_dataset(a.csv, 0);
  const auto mol = chembridge::embed::load_embeddings(a.mol, ds);
  const auto split = read_split(a.split, ds);
  const auto eval_rows = pick_subset(split, a.subset, ds.size());
  if (split.train.size() < 2 || eval_rows.size() < 2)
    throw DataError("ablate needs at least 2 train and 2 eval records");

  // The drug-name axis changes the text itself, so text embeddings are
  // rebuilt per setting rather than taken from a fixed EMB1 file.
  auto text_matrix = [&](bool with_name) {
    chembridge::embed::MatrixF m(ds.size(), a.embed_dim);
    for (int i = 0; i < ds.size(); ++i)
      m.row(i) = chembridge::embed::hash_embed(
                     chembridge::ingest::build_text_rich(ds.records[i], with_name), a.embed_dim)
                     .transpose();
    return m;
  };

  const auto mol_train = take_rows(mol.values, split.train);
  const auto mol_eval = take_rows(mol.values, eval_rows);
  const auto targets_train = take_targets(ds, split.train);
  const auto targets_eval = take_targets(ds, eval_rows);

  std::vector<std::vector<std::string>> rows;
  double best = -1.0;
  size_t best_row = 0;
  for (const std::string& dn : a.drugname) {
    const auto text_all = text_matrix(dn == "on");
    const auto text_train = take_rows(text_all, split.train);
    const auto text_eval = take_rows(text_all, eval_rows);
    for (double temp : a.temps) {
      for (double margin : a.margins) {
        auto cfg = a.cfg;
        cfg.temperature = temp;
        cfg.margin = margin;
        const auto [params, history] =
            chembridge::bridge::train(mol_train, text_train, targets_train, cfg);
        const auto B_T = chembridge::bridge::project(params.W_T, text_eval);
        const auto B_M = chembridge::bridge::project(params.W_M, mol_eval);
        const auto S = chembridge::eval::similarity_matrix(B_T, B_M);
        const double g1 =
            chembridge::eval::grouped_recall_at_1(S, targets_eval, a.min_group);
        const auto ci = chembridge::eval::bootstrap_ci("grouped_recall@1", S, targets_eval,
                                                       a.bootstrap, 0.95, cfg.seed,
                                                       a.min_group);
        if (g1 > best) {
          best = g1;
          best_row = rows.size();
        }
        rows.push_back({fmt(temp), fmt(margin), dn, fmt(g1), fmt(ci.first), fmt(ci.second),
                        ""});
        std::printf("ablate: T=%.3f m=%.3f drugname=%-3s grouped R@1 %.3f [%.3f, %.3f]\n",
                    temp, margin, dn.c_str(), g1, ci.first, ci.second);
      }
    }
  }
  rows[best_row][6] = "*";

  chembridge::csv::write_file(
      a.out, {"temperature", "margin", "drug_name", "grouped_recall1", "ci_lo", "ci_hi", "best"},
      rows);
  auto flags = config_flags(a.cfg);
  flags["embed_dim"] = std::to_string(a.embed_dim);
  flags["subset"] = a.subset;
  flags["bootstrap"] = std::to_string(a.bootstrap);
  flags["min_group"] = std::to_string(a.min_group);
  chembridge::manifest::write_manifest(a.out, "ablate", flags, a.cfg.seed,
                                       {{"mol", a.mol}, {"dataset", a.csv}, {"split", a.split}});
  std::printf("ablate: %zu rows, best %s -> %s\n", rows.size(),
              rows[best_row][3].c_str(), a.out.c_str());
}

void add_train_flags(CLI::App* cmd, chembridge::bridge::TrainConfig& cfg) {
  cmd->add_option("--dim", cfg.dim, "Shared embedding dimension")->capture_default_str();
  cmd->add_option("--temp", cfg.temperature, "Softmax temperature")->capture_default_str();
  cmd->add_option("--lr", cfg.lr, "AdamW learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", cfg.weight_decay, "Decoupled weight decay")
      ->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size, "Minibatch size")->capture_default_str();
  cmd->add_option("--beta", cfg.hard_negative_beta,
                  "Same-target negative weight (1 disables)")
      ->capture_default_str();
  cmd->add_option("--margin-weight", cfg.margin_weight, "Margin penalty weight")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "RNG seed (default: $CHEMBRIDGE_SEED or 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chembridge: align molecular fingerprints with text embeddings"};
  app.set_version_flag("--version", chembridge::manifest::kToolVersion);
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads,
                 "Worker threads (this build always runs the single-threaded reference path)");

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Clean a drug-target CSV and add text_rich");
  prepare->add_option("input", prep.in, "Raw CSV")->required();
  prepare->add_option("-o,--out", prep.out, "Cleaned CSV")->required();
  prepare->add_option("--min-text-len", prep.min_text_len, "Minimum mechanism length")
      ->capture_default_str();
  prepare->add_flag("--with-drug-name,!--without-drug-name", prep.with_drug_name,
                    "Append the drug name to text_rich");
  prepare->callback([&] { cmd_prepare(prep); });

  FingerprintArgs fpa;
  auto* fingerprint =
      app.add_subcommand("fingerprint", "Hashed circular fingerprints for every record");
  fingerprint->add_option("input", fpa.in, "Cleaned CSV")->required();
  fingerprint->add_option("-o,--out", fpa.out, "Fingerprint EMB1")->required();
  fingerprint->add_option("--radius", fpa.radius, "Morgan radius")->capture_default_str();
  fingerprint->add_option("--nbits", fpa.nbits, "Bits (power of two)")->capture_default_str();
  fingerprint->add_option("--salt-policy", fpa.salt_policy, "Multi-component handling")
      ->check(CLI::IsMember({"largest", "all"}))
      ->capture_default_str();
  fingerprint->callback([&] { cmd_fingerprint(fpa); });

  EmbedArgs emb;
  auto* embed = app.add_subcommand("embed", "Feature-hashed text embeddings from text_rich");
  embed->add_option("input", emb.in, "Cleaned CSV (with text_rich)")->required();
  embed->add_option("-o,--out", emb.out, "Text EMB1")->required();
  embed->add_option("--dim", emb.dim, "Embedding dimension (power of two)")
      ->capture_default_str();
  embed->callback([&] { cmd_embed(emb); });

  SplitArgs spl;
  spl.seed = env_seed();
  auto* split = app.add_subcommand("split", "Assign records to train/test");
  split->add_option("input", spl.in, "Cleaned CSV")->required();
  split->add_option("-o,--out", spl.out, "Split CSV")->required();
  split->add_option("--mode", spl.mode, "scaffold or random")
      ->check(CLI::IsMember({"scaffold", "random"}))
      ->capture_default_str();
  split->add_option("--test-frac", spl.test_frac, "Target test fraction")
      ->capture_default_str();
  split->add_option("--seed", spl.seed, "RNG seed (default: $CHEMBRIDGE_SEED or 0)");
  split->add_option("--salt-policy", spl.salt_policy, "Multi-component handling")
      ->check(CLI::IsMember({"largest", "all"}))
      ->capture_default_str();
  split->callback([&] { cmd_split(spl); });

  TrainArgs tra;
  tra.cfg.seed = env_seed();
  auto* train = app.add_subcommand("train", "Fit the projection heads on the train subset");
  train->add_option("mol", tra.mol, "Molecule EMB1")->required();
  train->add_option("text", tra.text, "Text EMB1")->required();
  train->add_option("dataset", tra.csv, "Cleaned CSV")->required();
  train->add_option("split", tra.split, "Split CSV")->required();
  train->add_option("-o,--out", tra.out, "Bridge checkpoint (BRG1)")->required();
  train->add_option("--history", tra.history, "Loss history CSV (default: history.csv)");
  train->add_option("--margin", tra.cfg.margin, "Same-target margin")->capture_default_str();
  add_train_flags(train, tra.cfg);
  train->callback([&] { cmd_train(tra); });

  EvalArgs eva;
  eva.seed = env_seed();
  auto* evalc = app.add_subcommand("eval", "Retrieval metrics for a trained bridge");
  evalc->add_option("bridge", eva.bridge, "Bridge checkpoint")->required();
  evalc->add_option("mol", eva.mol, "Molecule EMB1")->required();
  evalc->add_option("text", eva.text, "Text EMB1")->required();
  evalc->add_option("dataset", eva.csv, "Cleaned CSV")->required();
  evalc->add_option("split", eva.split, "Split CSV")->required();
  evalc->add_option("-o,--out", eva.out, "Report JSON")->required();
  evalc->add_option("--cmc", eva.cmc, "CMC CSV (default: cmc.csv next to the report)");
  evalc->add_option("--sim", eva.sim, "Similarity CSV (default: sim.csv next to the report)");
  evalc->add_option("--subset", eva.subset, "test, train or all")
      ->check(CLI::IsMember({"test", "train", "all"}))
      ->capture_default_str();
  evalc->add_option("--k-max", eva.k_max, "CMC depth (clamped to the query count)")
      ->capture_default_str();
  evalc->add_option("--bootstrap", eva.bootstrap, "Bootstrap replicates (0 skips)")
      ->capture_default_str();
  evalc->add_option("--export-sim", eva.export_sim, "Export the top-left K x K similarities");
  evalc->add_option("--min-group", eva.min_group, "Minimum group size for grouped metrics")
      ->capture_default_str();
  evalc->add_option("--seed", eva.seed, "Bootstrap seed (default: $CHEMBRIDGE_SEED or 0)");
  evalc->callback([&] { cmd_eval(eva); });

  AblateArgs abl;
  abl.cfg.seed = env_seed();
  auto* ablate = app.add_subcommand("ablate", "Temperature / margin / drug-name grid");
  ablate->add_option("mol", abl.mol, "Molecule EMB1")->required();
  ablate->add_option("dataset", abl.csv, "Cleaned CSV")->required();
  ablate->add_option("split", abl.split, "Split CSV")->required();
  ablate->add_option("-o,--out", abl.out, "Ablation CSV")->required();
  ablate->add_option("--temps", abl.temps, "Temperatures")->delimiter(',')->capture_default_str();
  ablate->add_option("--margins", abl.margins, "Margins")->delimiter(',')->capture_default_str();
  ablate->add_option("--drugname", abl.drugname, "on,off")
      ->delimiter(',')
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  ablate->add_option("--embed-dim", abl.embed_dim, "Text embedding dimension")
      ->capture_default_str();
  ablate->add_option("--subset", abl.subset, "Evaluation subset")
      ->check(CLI::IsMember({"test", "train", "all"}))
      ->capture_default_str();
  ablate->add_option("--bootstrap", abl.bootstrap, "Bootstrap replicates per cell")
      ->capture_default_str();
  ablate->add_option("--min-group", abl.min_group, "Minimum group size")->capture_default_str();
  add_train_flags(ablate, abl.cfg);
  ablate->callback([&] { cmd_ablate(abl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const chembridge::Error& e) {
    std::fprintf(stderr, "chembridge: error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "chembridge: unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
