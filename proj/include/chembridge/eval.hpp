// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chembridge::eval {

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Query direction. Metrics treat rows of S as queries; MolToText runs on the
// transpose.
enum class Direction { TextToMol, MolToText };

// S_ij = dot(B_T[i], B_M[j]); rows must be unit-norm.
MatrixF similarity_matrix(const MatrixF& B_T, const MatrixF& B_M);

// Rank of the diagonal entry in row `row`; among equal scores the lower
// column index ranks first.
int rank_of(const MatrixF& S, int row);

double recall_at_k(const MatrixF& S, int k, Direction dir);
double mrr(const MatrixF& S, Direction dir);

// Candidates restricted to columns sharing the query's target id; queries in
// groups smaller than min_group are excluded. Throws when no query qualifies.
double grouped_recall_at_1(const MatrixF& S, const std::vector<std::string>& target_ids,
                           int min_group = 3);

// [recall@1 ... recall@k_max].
std::vector<double> cmc_curve(const MatrixF& S, int k_max);
std::vector<double> cmc_curve_grouped(const MatrixF& S, const std::vector<std::string>& target_ids,
                                      int k_max, int min_group = 3);

// Percentile bootstrap over queries (candidate set stays the full matrix).
// metric is one of "recall@1", "mrr", "grouped_recall@1". Replicate b draws
// from a generator seeded with seed+b; undefined replicates are redrawn, with
// a cap of 10*B total attempts.
std::pair<double, double> bootstrap_ci(const std::string& metric, const MatrixF& S,
                                       const std::vector<std::string>& target_ids, int B,
                                       double level, uint64_t seed, int min_group = 3);

// Top-left K x K block as CSV, 6-decimal fixed point, ids in the header row
// and first column.
void export_simmatrix(const MatrixF& S, int K, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids,
                      const std::filesystem::path& path);

struct CiEntry {
  double lo = 0;
  double hi = 0;
  int B = 0;
  uint64_t seed = 0;
};

struct DirectionReport {
  std::map<int, double> recall_at;
  double mrr = 0;
  std::optional<double> grouped_recall1;  // absent when no group qualifies
  std::map<std::string, CiEntry> bootstrap;
  std::vector<double> cmc_global;
  std::vector<double> cmc_grouped;
};

struct EvalReport {
  int n_queries = 0;
  int n_grouped_queries = 0;
  int min_group = 3;
  DirectionReport text_to_mol;
  DirectionReport mol_to_text;
};

// Full metric suite in both directions; bootstrap_B = 0 skips the intervals.
EvalReport build_report(const MatrixF& B_T, const MatrixF& B_M,
                        const std::vector<std::string>& target_ids, int bootstrap_B,
                        uint64_t seed, int min_group = 3, int k_max = 50);

std::string report_to_json(const EvalReport& r);
void save_report(const std::filesystem::path& path, const EvalReport& r);
void save_cmc_csv(const std::filesystem::path& path, const EvalReport& r);

}  // namespace chembridge::eval
