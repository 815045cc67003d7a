// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chembridge/csv.hpp"
#include "chembridge/errors.hpp"
#include "chembridge/eval.hpp"
#include "chembridge/rng.hpp"

using namespace chembridge;
namespace ev = chembridge::eval;
using ev::Direction;
using ev::MatrixF;

namespace {

// Rank by actually sorting the candidate list (stable sort keeps lower
// column indices first among ties) — a different computation path from
// the library's counting rule.
int sort_rank(const MatrixF& S, int row, const std::vector<int>& cols) {
  std::vector<std::pair<float, int>> cand;
  for (int j : cols) cand.emplace_back(S(row, j), j);
  std::stable_sort(cand.begin(), cand.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t p = 0; p < cand.size(); ++p)
    if (cand[p].second == row) return static_cast<int>(p) + 1;
  return -1;
}

std::vector<int> all_cols(int n) {
  std::vector<int> c(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = i;
  return c;
}

double oracle_recall_at_k(const MatrixF& S, int k, Direction dir) {
  const MatrixF St = dir == Direction::TextToMol ? S : MatrixF(S.transpose());
  const int n = static_cast<int>(St.rows());
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (sort_rank(St, i, all_cols(n)) <= k) ++hits;
  return static_cast<double>(hits) / n;
}

double oracle_mrr(const MatrixF& S, Direction dir) {
  const MatrixF St = dir == Direction::TextToMol ? S : MatrixF(S.transpose());
  const int n = static_cast<int>(St.rows());
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += 1.0 / sort_rank(St, i, all_cols(n));
  return acc / n;
}

std::vector<int> group_cols(const std::vector<std::string>& ids, int q) {
  std::vector<int> cols;
  for (int j = 0; j < static_cast<int>(ids.size()); ++j)
    if (ids[static_cast<size_t>(j)] == ids[static_cast<size_t>(q)]) cols.push_back(j);
  return cols;
}

double oracle_grouped_recall_at_k(const MatrixF& S, const std::vector<std::string>& ids,
                                  int k, int min_group) {
  int counted = 0, hits = 0;
  for (int q = 0; q < static_cast<int>(ids.size()); ++q) {
    auto cols = group_cols(ids, q);
    if (static_cast<int>(cols.size()) < min_group) continue;
    ++counted;
    if (sort_rank(S, q, cols) <= k) ++hits;
  }
  REQUIRE(counted > 0);
  return static_cast<double>(hits) / counted;
}

MatrixF random_matrix(int n, Xoshiro256& rng) {
  MatrixF S(n, n);
  for (int i = 0; i < S.size(); ++i)
    S.data()[i] = static_cast<float>(2.0 * rng.next_double() - 1.0);
  return S;
}

// Entries restricted to {0, 0.5, 1} for tie-heavy stress cases.
MatrixF coarse_matrix(int n, Xoshiro256& rng) {
  MatrixF S(n, n);
  for (int i = 0; i < S.size(); ++i)
    S.data()[i] = 0.5f * static_cast<float>(rng.next_below(3));
  return S;
}

}  // namespace

TEST_CASE("similarity matrix basics") {
  MatrixF eye = MatrixF::Identity(3, 3);
  CHECK(ev::similarity_matrix(eye, eye) == eye);

  Xoshiro256 rng(1);
  MatrixF B(4, 6);
  for (int i = 0; i < B.size(); ++i) B.data()[i] = static_cast<float>(rng.next_double() - 0.5);
  for (int i = 0; i < 4; ++i) B.row(i) /= B.row(i).norm();
  MatrixF S = ev::similarity_matrix(B, B);
  for (int i = 0; i < 4; ++i) CHECK(S(i, i) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(S.cwiseAbs().maxCoeff() <= 1.0f + 1e-6f);

  MatrixF narrow(3, 2);
  narrow.setOnes();
  CHECK_THROWS_AS(ev::similarity_matrix(eye, narrow), DataError);
}

TEST_CASE("rank ties break toward the lower column index") {
  MatrixF flat = MatrixF::Ones(4, 4);
  for (int i = 0; i < 4; ++i) CHECK(ev::rank_of(flat, i) == i + 1);

  MatrixF S(3, 3);
  S << 0.5, 0.5, 0.1,   // tie with an earlier column does not hurt row 0
      0.5, 0.5, 0.1,    // tie with column 0 pushes row 1 to rank 2
      0.9, 0.1, 0.2;
  CHECK(ev::rank_of(S, 0) == 1);
  CHECK(ev::rank_of(S, 1) == 2);
  CHECK(ev::rank_of(S, 2) == 2);
}

TEST_CASE("recall and reciprocal rank on explicit matrices") {
  MatrixF eye = MatrixF::Identity(5, 5);
  CHECK(ev::recall_at_k(eye, 1, Direction::TextToMol) == 1.0);
  CHECK(ev::mrr(eye, Direction::TextToMol) == 1.0);

  // The true entry is always the second largest in its row.
  MatrixF second(3, 3);
  second << 0.5, 0.9, 0.1, 0.1, 0.5, 0.9, 0.9, 0.1, 0.5;
  CHECK(ev::recall_at_k(second, 1, Direction::TextToMol) == 0.0);
  CHECK(ev::recall_at_k(second, 2, Direction::TextToMol) == 1.0);

  // Ranks [1, 2, 4] for the first three queries, rank 1 for the rest.
  MatrixF ranked = MatrixF::Zero(6, 6);
  ranked.diagonal().setConstant(0.5f);
  ranked(1, 3) = 0.8f;                                  // rank 2
  ranked(2, 0) = 0.9f;
  ranked(2, 1) = 0.8f;
  ranked(2, 4) = 0.7f;                                  // rank 4
  CHECK(ev::rank_of(ranked, 0) == 1);
  CHECK(ev::rank_of(ranked, 1) == 2);
  CHECK(ev::rank_of(ranked, 2) == 4);
  const double expected = (1.0 + 0.5 + 0.25 + 3.0) / 6.0;
  CHECK(ev::mrr(ranked, Direction::TextToMol) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(ev::recall_at_k(eye, 0, Direction::TextToMol), DataError);
  CHECK_THROWS_AS(ev::recall_at_k(eye, 6, Direction::TextToMol), DataError);
}

TEST_CASE("metrics match the sort-based oracle on random matrices") {
  Xoshiro256 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixF S = random_matrix(50, rng);
    for (Direction dir : {Direction::TextToMol, Direction::MolToText}) {
      for (int k : {1, 3, 10, 50})
        CHECK(ev::recall_at_k(S, k, dir) == oracle_recall_at_k(S, k, dir));
      CHECK(ev::mrr(S, dir) == doctest::Approx(oracle_mrr(S, dir)).epsilon(1e-12));
    }
  }
}

TEST_CASE("tie-heavy stress: coarse-valued matrices match the oracle exactly") {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 10000; ++trial) {
    MatrixF S = coarse_matrix(8, rng);
    CHECK(ev::recall_at_k(S, 1, Direction::TextToMol) ==
          oracle_recall_at_k(S, 1, Direction::TextToMol));
    CHECK(ev::recall_at_k(S, 3, Direction::MolToText) ==
          oracle_recall_at_k(S, 3, Direction::MolToText));
    CHECK(ev::mrr(S, Direction::TextToMol) == oracle_mrr(S, Direction::TextToMol));
  }
}

TEST_CASE("metrics are rank-based: exact halving changes nothing") {
  Xoshiro256 rng(9);
  MatrixF S = random_matrix(30, rng);
  MatrixF half = 0.5f * S;  // power-of-two scaling is exact and order-preserving
  for (int k : {1, 5, 30})
    CHECK(ev::recall_at_k(S, k, Direction::TextToMol) ==
          ev::recall_at_k(half, k, Direction::TextToMol));
  CHECK(ev::mrr(S, Direction::MolToText) == ev::mrr(half, Direction::MolToText));
}

TEST_CASE("grouped recall restricts candidates and excludes small groups") {
  const std::vector<std::string> ids = {"a", "a", "b", "b", "b", "b", "b"};
  MatrixF S = MatrixF::Zero(7, 7);
  // Group "a" (size 2 < 3) must be excluded; both of its queries would miss.
  S(0, 0) = 0.1f;
  S(0, 1) = 0.9f;
  S(1, 1) = 0.2f;
  S(1, 0) = 0.8f;
  // Group "b": queries 2..4 hit, 5..6 miss.
  for (int q = 2; q <= 6; ++q) S(q, q) = (q <= 4) ? 0.9f : 0.2f;
  S(5, 2) = 0.7f;
  S(6, 3) = 0.6f;
  // Distractors outside the group must be ignored by the restriction.
  S(2, 0) = 0.99f;
  S(3, 1) = 0.99f;
  CHECK(ev::grouped_recall_at_1(S, ids) == doctest::Approx(3.0 / 5.0).epsilon(1e-12));

  // Within-group identity block: perfect within-target discrimination.
  MatrixF eye = MatrixF::Identity(7, 7);
  CHECK(ev::grouped_recall_at_1(eye, ids) == 1.0);

  const std::vector<std::string> distinct = {"a", "b", "c", "d", "e", "f", "g"};
  CHECK_THROWS_WITH_AS(ev::grouped_recall_at_1(eye, distinct),
                       doctest::Contains("no grouped queries"), DataError);

  Xoshiro256 rng(10);
  const std::vector<std::string> mixed = {"t1", "t2", "t1", "t3", "t1", "t2",
                                          "t3", "t3", "t1", "t4"};
  for (int trial = 0; trial < 20; ++trial) {
    MatrixF R = random_matrix(10, rng);
    CHECK(ev::grouped_recall_at_1(R, mixed) == oracle_grouped_recall_at_k(R, mixed, 1, 3));
  }
}

TEST_CASE("cumulative match curves") {
  MatrixF eye = MatrixF::Identity(6, 6);
  auto ones = ev::cmc_curve(eye, 6);
  CHECK(ones == std::vector<double>(6, 1.0));

  Xoshiro256 rng(11);
  MatrixF S = random_matrix(25, rng);
  auto curve = ev::cmc_curve(S, 25);
  REQUIRE(curve.size() == 25);
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] >= curve[i - 1]);
  CHECK(curve.back() == 1.0);
  for (int k = 1; k <= 25; ++k)
    CHECK(curve[static_cast<size_t>(k - 1)] == ev::recall_at_k(S, k, Direction::TextToMol));

  std::vector<std::string> ids(25);
  for (int i = 0; i < 25; ++i) ids[static_cast<size_t>(i)] = "t" + std::to_string(i % 4);
  auto grouped = ev::cmc_curve_grouped(S, ids, 5, 3);
  REQUIRE(grouped.size() == 5);
  for (int k = 1; k <= 5; ++k)
    CHECK(grouped[static_cast<size_t>(k - 1)] == oracle_grouped_recall_at_k(S, ids, k, 3));
  // Every group here has size <= 7, so the curve saturates at that k.
  auto full = ev::cmc_curve_grouped(S, ids, 7, 3);
  CHECK(full.back() == 1.0);
  CHECK_THROWS_AS(ev::cmc_curve_grouped(S, ids, 8, 3), DataError);

  const std::vector<std::string> distinct_ids = [&] {
    std::vector<std::string> v(25);
    for (int i = 0; i < 25; ++i) v[static_cast<size_t>(i)] = "u" + std::to_string(i);
    return v;
  }();
  CHECK_THROWS_AS(ev::cmc_curve_grouped(S, distinct_ids, 1, 3), DataError);
  CHECK_THROWS_AS(ev::cmc_curve(S, 26), DataError);
}

TEST_CASE("bootstrap intervals") {
  const std::vector<std::string> ids = {"a", "a", "a", "b", "b", "b", "c", "d"};
  MatrixF eye = MatrixF::Identity(8, 8);

  // Metric constant across replicates: degenerate interval.
  auto [lo1, hi1] = ev::bootstrap_ci("recall@1", eye, ids, 200, 0.95, 5);
  CHECK(lo1 == 1.0);
  CHECK(hi1 == 1.0);

  Xoshiro256 rng(12);
  MatrixF S = random_matrix(8, rng);
  auto a = ev::bootstrap_ci("mrr", S, ids, 300, 0.95, 42);
  auto b = ev::bootstrap_ci("mrr", S, ids, 300, 0.95, 42);
  CHECK(a == b);
  CHECK(a.first < a.second);  // replicate spread on a random matrix

  // The interval brackets the point estimate across random trials.
  for (int trial = 0; trial < 100; ++trial) {
    MatrixF R = random_matrix(12, rng);
    std::vector<std::string> rids(12);
    for (int i = 0; i < 12; ++i) rids[static_cast<size_t>(i)] = "t" + std::to_string(i % 5);
    auto [lo, hi] = ev::bootstrap_ci("recall@1", R, rids, 200, 0.95, 100 + trial);
    const double point = ev::recall_at_k(R, 1, Direction::TextToMol);
    CHECK(lo <= point);
    CHECK(point <= hi);
    auto [mlo, mhi] = ev::bootstrap_ci("mrr", R, rids, 200, 0.95, 500 + trial);
    const double mpoint = ev::mrr(R, Direction::TextToMol);
    CHECK(mlo <= mpoint);
    CHECK(mpoint <= mhi);
  }

  // Replicates without qualifying grouped queries are redrawn.
  std::vector<std::string> sparse = {"g", "g", "g", "x0", "x1", "x2", "x3", "x4"};
  auto [glo, ghi] = ev::bootstrap_ci("grouped_recall@1", S, sparse, 150, 0.95, 9);
  CHECK(glo >= 0.0);
  CHECK(ghi <= 1.0);
  CHECK(glo <= ghi);

  // ... but a metric that is never defined exhausts the attempt cap.
  std::vector<std::string> lonely = {"a", "b", "c", "d", "e", "f", "g", "h"};
  CHECK_THROWS_AS(ev::bootstrap_ci("grouped_recall@1", S, lonely, 100, 0.95, 1), DataError);

  CHECK_THROWS_AS(ev::bootstrap_ci("recall@1", S, ids, 99, 0.95, 1), DataError);
  CHECK_THROWS_AS(ev::bootstrap_ci("recall@1", S, ids, 100, 1.0, 1), DataError);
  CHECK_THROWS_AS(ev::bootstrap_ci("nope", S, ids, 100, 0.95, 1), DataError);
}

TEST_CASE("similarity block export") {
  Xoshiro256 rng(13);
  MatrixF S = random_matrix(45, rng);
  std::vector<std::string> row_ids(45), col_ids(45);
  for (int i = 0; i < 45; ++i) {
    row_ids[static_cast<size_t>(i)] = "R" + std::to_string(i) + ",x";  // forces quoting
    col_ids[static_cast<size_t>(i)] = "C" + std::to_string(i);
  }
  auto path = std::filesystem::temp_directory_path() / "cb_eval_sim.csv";

  for (int K : {40, 30, 1}) {
    ev::export_simmatrix(S, K, row_ids, col_ids, path);
    auto table = csv::read_file(path);
    REQUIRE(static_cast<int>(table.rows.size()) == K);
    REQUIRE(static_cast<int>(table.header.size()) == K + 1);
    CHECK(table.header[0] == "id");
    CHECK(table.header[1] == "C0");
    CHECK(table.rows[0][0] == "R0,x");
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        const double parsed =
            std::stod(table.rows[static_cast<size_t>(i)][static_cast<size_t>(j + 1)]);
        CHECK(std::abs(parsed - static_cast<double>(S(i, j))) <= 5.000001e-7);
      }
  }

  ev::export_simmatrix(S, 1, row_ids, col_ids, path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  char expect[32];
  std::snprintf(expect, sizeof(expect), ",%.6f", static_cast<double>(S(0, 0)));
  CHECK(line == "\"R0,x\"" + std::string(expect));

  CHECK_THROWS_AS(ev::export_simmatrix(S, 46, row_ids, col_ids, path), DataError);
  CHECK_THROWS_AS(ev::export_simmatrix(S, 0, row_ids, col_ids, path), DataError);
}

TEST_CASE("report assembly and serialization") {
  Xoshiro256 rng(14);
  const int n = 20;
  MatrixF B_T(n, 6), B_M(n, 6);
  for (int i = 0; i < B_T.size(); ++i)
    B_T.data()[i] = static_cast<float>(2 * rng.next_double() - 1);
  for (int i = 0; i < B_M.size(); ++i)
    B_M.data()[i] = static_cast<float>(2 * rng.next_double() - 1);
  for (int i = 0; i < n; ++i) {
    B_T.row(i) /= B_T.row(i).norm();
    B_M.row(i) /= B_M.row(i).norm();
  }
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[static_cast<size_t>(i)] = "t" + std::to_string(i % 6);

  auto rep = ev::build_report(B_T, B_M, ids, 150, 7);
  CHECK(rep.n_queries == n);
  CHECK(rep.n_grouped_queries == n);  // every group has size >= 3 here
  REQUIRE(rep.text_to_mol.recall_at.count(1));
  REQUIRE(rep.text_to_mol.recall_at.count(5));
  REQUIRE(rep.text_to_mol.recall_at.count(10));
  CHECK(rep.text_to_mol.recall_at[1] <= rep.text_to_mol.recall_at[5]);
  CHECK(rep.text_to_mol.recall_at[5] <= rep.text_to_mol.recall_at[10]);
  CHECK(rep.text_to_mol.mrr >= rep.text_to_mol.recall_at[1]);
  CHECK(rep.text_to_mol.mrr <= 1.0);
  CHECK(rep.text_to_mol.cmc_global.size() == 20);  // k_max=50 clamped to n
  REQUIRE(rep.text_to_mol.grouped_recall1.has_value());
  CHECK(*rep.text_to_mol.grouped_recall1 ==
        doctest::Approx(ev::grouped_recall_at_1(ev::similarity_matrix(B_T, B_M), ids)));
  CHECK(rep.text_to_mol.cmc_grouped.size() == 4);  // largest group has 4 members
  REQUIRE(rep.text_to_mol.bootstrap.count("recall@1"));
  REQUIRE(rep.text_to_mol.bootstrap.count("mrr"));
  REQUIRE(rep.text_to_mol.bootstrap.count("grouped_recall@1"));
  CHECK(rep.mol_to_text.cmc_global.size() == 20);

  const auto& ci = rep.text_to_mol.bootstrap.at("recall@1");
  CHECK(ci.B == 150);
  CHECK(ci.lo <= rep.text_to_mol.recall_at[1]);
  CHECK(ci.hi >= rep.text_to_mol.recall_at[1]);

  auto j = nlohmann::json::parse(ev::report_to_json(rep));
  CHECK(j["n_queries"] == n);
  CHECK(j["text_to_mol"]["recall_at"].contains("1"));
  CHECK(j["text_to_mol"]["bootstrap"]["mrr"].contains("lo"));
  CHECK(j["mol_to_text"]["cmc_global"].size() == 20);
  CHECK(!j["text_to_mol"]["grouped_recall1"].is_null());

  // Without any qualifying group the grouped block is null, not fabricated.
  std::vector<std::string> distinct(n);
  for (int i = 0; i < n; ++i) distinct[static_cast<size_t>(i)] = "u" + std::to_string(i);
  auto rep2 = ev::build_report(B_T, B_M, distinct, 0, 7);
  CHECK(rep2.n_grouped_queries == 0);
  CHECK(!rep2.text_to_mol.grouped_recall1.has_value());
  CHECK(rep2.text_to_mol.cmc_grouped.empty());
  CHECK(rep2.text_to_mol.bootstrap.empty());
  auto j2 = nlohmann::json::parse(ev::report_to_json(rep2));
  CHECK(j2["text_to_mol"]["grouped_recall1"].is_null());

  auto report_path = std::filesystem::temp_directory_path() / "cb_eval_report.json";
  ev::save_report(report_path, rep);
  std::ifstream rin(report_path);
  std::ostringstream rss;
  rss << rin.rdbuf();
  CHECK(nlohmann::json::parse(rss.str()) == j);

  auto cmc_path = std::filesystem::temp_directory_path() / "cb_eval_cmc.csv";
  ev::save_cmc_csv(cmc_path, rep);
  auto cmc_table = csv::read_file(cmc_path);
  CHECK(cmc_table.header == std::vector<std::string>{"direction", "scope", "k", "recall"});
  CHECK(cmc_table.rows.size() == 2 * (20 + 4));
  CHECK(cmc_table.rows[0][0] == "text_to_mol");
  CHECK(cmc_table.rows[0][2] == "1");
}
