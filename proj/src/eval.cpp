// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <unordered_map>

#include "json.hpp"

#include "chembridge/csv.hpp"
#include "chembridge/errors.hpp"
#include "chembridge/rng.hpp"

namespace chembridge::eval {
namespace {

void require_square(const MatrixF& S) {
  if (S.rows() != S.cols()) throw DataError("similarity matrix must be square");
  if (S.rows() == 0) throw DataError("similarity matrix is empty");
}

// Columns grouped by target id, in column order.
std::vector<std::vector<int>> group_columns(const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> first;
  std::vector<std::vector<int>> groups(ids.size());
  std::vector<int> of(ids.size());
  int next = 0;
  for (int j = 0; j < static_cast<int>(ids.size()); ++j) {
    auto [it, inserted] = first.emplace(ids[j], next);
    if (inserted) ++next;
    of[j] = it->second;
  }
  groups.resize(next);
  for (int j = 0; j < static_cast<int>(ids.size()); ++j) groups[of[j]].push_back(j);
  return groups;
}

std::vector<const std::vector<int>*> group_of_query(const std::vector<std::string>& ids,
                                                    const std::vector<std::vector<int>>& groups) {
  std::unordered_map<std::string, const std::vector<int>*> by_id;
  for (const auto& g : groups) by_id.emplace(ids[g.front()], &g);
  std::vector<const std::vector<int>*> out(ids.size());
  for (size_t q = 0; q < ids.size(); ++q) out[q] = by_id.at(ids[q]);
  return out;
}

int rank_within(const MatrixF& S, int q, const std::vector<int>& cols) {
  const float self = S(q, q);
  int rank = 1;
  for (int j : cols) {
    if (j == q) continue;
    const float v = S(q, j);
    if (v > self || (v == self && j < q)) ++rank;
  }
  return rank;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

// Metric over an explicit query multiset (bootstrap resamples queries while
// candidates stay fixed). nullopt = undefined on this sample.
using QueryMetric = std::function<std::optional<double>(const std::vector<int>&)>;

QueryMetric make_metric(const std::string& name, const MatrixF& S,
                        const std::vector<std::string>& target_ids, int min_group) {
  const int n = static_cast<int>(S.rows());
  if (name == "recall@1" || name == "mrr") {
    std::vector<int> ranks(n);
    for (int i = 0; i < n; ++i) ranks[i] = rank_of(S, i);
    const bool is_recall = (name == "recall@1");
    return [ranks, is_recall](const std::vector<int>& qs) -> std::optional<double> {
      double acc = 0;
      for (int q : qs) acc += is_recall ? (ranks[q] == 1 ? 1.0 : 0.0) : 1.0 / ranks[q];
      return acc / static_cast<double>(qs.size());
    };
  }
  if (name == "grouped_recall@1") {
    if (static_cast<int>(target_ids.size()) != n)
      throw DataError("grouped metric needs target ids aligned to the matrix");
    const auto groups = group_columns(target_ids);
    const auto of_query = group_of_query(target_ids, groups);
    std::vector<char> qualifies(n);
    std::vector<char> hit(n);
    for (int q = 0; q < n; ++q) {
      qualifies[q] = of_query[q]->size() >= static_cast<size_t>(min_group);
      hit[q] = qualifies[q] && rank_within(S, q, *of_query[q]) == 1;
    }
    return [qualifies, hit](const std::vector<int>& qs) -> std::optional<double> {
      long count = 0, hits = 0;
      for (int q : qs) {
        if (!qualifies[q]) continue;
        ++count;
        hits += hit[q];
      }
      if (count == 0) return std::nullopt;
      return static_cast<double>(hits) / static_cast<double>(count);
    };
  }
  throw DataError("unknown bootstrap metric '" + name + "'");
}

}  // namespace

MatrixF similarity_matrix(const MatrixF& B_T, const MatrixF& B_M) {
  if (B_T.rows() != B_M.rows()) throw DataError("similarity_matrix: row counts differ");
  if (B_T.cols() != B_M.cols()) throw DataError("similarity_matrix: dims differ");
  return B_T * B_M.transpose();
}

int rank_of(const MatrixF& S, int row) {
  const int n = static_cast<int>(S.cols());
  const float self = S(row, row);
  int rank = 1;
  for (int j = 0; j < n; ++j) {
    if (j == row) continue;
    const float v = S(row, j);
    if (v > self || (v == self && j < row)) ++rank;
  }
  return rank;
}

double recall_at_k(const MatrixF& S, int k, Direction dir) {
  require_square(S);
  const int n = static_cast<int>(S.rows());
  if (k < 1 || k > n) throw DataError("recall_at_k: k out of range");
  const MatrixF St = dir == Direction::TextToMol ? S : MatrixF(S.transpose());
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (rank_of(St, i) <= k) ++hits;
  return static_cast<double>(hits) / n;
}

double mrr(const MatrixF& S, Direction dir) {
  require_square(S);
  const int n = static_cast<int>(S.rows());
  const MatrixF St = dir == Direction::TextToMol ? S : MatrixF(S.transpose());
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += 1.0 / rank_of(St, i);
  return acc / n;
}

double grouped_recall_at_1(const MatrixF& S, const std::vector<std::string>& target_ids,
                           int min_group) {
  require_square(S);
  const int n = static_cast<int>(S.rows());
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  auto metric = make_metric("grouped_recall@1", S, target_ids, min_group);
  auto v = metric(all);
  if (!v) throw DataError("no grouped queries (every target group is smaller than " +
                          std::to_string(min_group) + ")");
  return *v;
}

std::vector<double> cmc_curve(const MatrixF& S, int k_max) {
  require_square(S);
  const int n = static_cast<int>(S.rows());
  if (k_max < 1 || k_max > n) throw DataError("cmc_curve: k_max out of range");
  std::vector<long> at_rank(k_max + 1, 0);
  for (int i = 0; i < n; ++i) {
    const int r = rank_of(S, i);
    if (r <= k_max) ++at_rank[r];
  }
  std::vector<double> curve(k_max);
  long cum = 0;
  for (int k = 1; k <= k_max; ++k) {
    cum += at_rank[k];
    curve[k - 1] = static_cast<double>(cum) / n;
  }
  return curve;
}

std::vector<double> cmc_curve_grouped(const MatrixF& S, const std::vector<std::string>& target_ids,
                                      int k_max, int min_group) {
  require_square(S);
  const int n = static_cast<int>(S.rows());
  if (static_cast<int>(target_ids.size()) != n)
    throw DataError("cmc_curve_grouped: target id count mismatch");
  const auto groups = group_columns(target_ids);
  const auto of_query = group_of_query(target_ids, groups);
  size_t max_group = 0;
  for (const auto& g : groups)
    if (g.size() >= static_cast<size_t>(min_group)) max_group = std::max(max_group, g.size());
  if (max_group == 0) throw DataError("no grouped queries (every target group is smaller than " +
                                      std::to_string(min_group) + ")");
  if (k_max < 1 || k_max > static_cast<int>(max_group))
    throw DataError("cmc_curve_grouped: k_max exceeds the largest qualifying group");
  std::vector<long> at_rank(k_max + 1, 0);
  long n_q = 0;
  for (int q = 0; q < n; ++q) {
    if (of_query[q]->size() < static_cast<size_t>(min_group)) continue;
    ++n_q;
    const int r = rank_within(S, q, *of_query[q]);
    if (r <= k_max) ++at_rank[r];
  }
  std::vector<double> curve(k_max);
  long cum = 0;
  for (int k = 1; k <= k_max; ++k) {
    cum += at_rank[k];
    curve[k - 1] = static_cast<double>(cum) / n_q;
  }
  return curve;
}

std::pair<double, double> bootstrap_ci(const std::string& metric, const MatrixF& S,
                                       const std::vector<std::string>& target_ids, int B,
                                       double level, uint64_t seed, int min_group) {
  require_square(S);
  if (B < 100) throw DataError("bootstrap needs B >= 100");
  if (!(level > 0 && level < 1)) throw DataError("bootstrap level must be in (0,1)");
  const int n = static_cast<int>(S.rows());
  auto fn = make_metric(metric, S, target_ids, min_group);
  std::vector<double> values;
  values.reserve(B);
  long attempts = 0;
  const long cap = 10L * B;
  std::vector<int> qs(n);
  for (int b = 0; b < B; ++b) {
    Xoshiro256 rng(seed + static_cast<uint64_t>(b));
    while (true) {
      if (++attempts > cap)
        throw DataError("bootstrap: metric undefined on too many replicates");
      for (int i = 0; i < n; ++i)
        qs[i] = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
      auto v = fn(qs);
      if (v) {
        values.push_back(*v);
        break;
      }
    }
  }
  const double alpha = 1.0 - level;
  return {quantile(values, alpha / 2.0), quantile(values, 1.0 - alpha / 2.0)};
}

void export_simmatrix(const MatrixF& S, int K, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids,
                      const std::filesystem::path& path) {
  if (K < 1 || K > S.rows() || K > S.cols()) throw DataError("export_simmatrix: K out of range");
  if (static_cast<int>(row_ids.size()) < K || static_cast<int>(col_ids.size()) < K)
    throw DataError("export_simmatrix: not enough ids for K");
  std::string out = "id";
  for (int j = 0; j < K; ++j) {
    out += ',';
    out += csv::escape_field(col_ids[j]);
  }
  out += '\n';
  char buf[32];
  for (int i = 0; i < K; ++i) {
    out += csv::escape_field(row_ids[i]);
    for (int j = 0; j < K; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.6f", static_cast<double>(S(i, j)));
      out += buf;
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

EvalReport build_report(const MatrixF& B_T, const MatrixF& B_M,
                        const std::vector<std::string>& target_ids, int bootstrap_B,
                        uint64_t seed, int min_group, int k_max) {
  const MatrixF S = similarity_matrix(B_T, B_M);
  require_square(S);
  const int n = static_cast<int>(S.rows());
  if (static_cast<int>(target_ids.size()) != n)
    throw DataError("build_report: target id count mismatch");

  EvalReport rep;
  rep.n_queries = n;
  rep.min_group = min_group;
  const auto groups = group_columns(target_ids);
  size_t max_group = 0;
  for (const auto& g : groups) {
    if (g.size() >= static_cast<size_t>(min_group)) {
      rep.n_grouped_queries += static_cast<int>(g.size());
      max_group = std::max(max_group, g.size());
    }
  }

  auto fill = [&](const MatrixF& Sd) {
    DirectionReport d;
    for (int k : {1, 5, 10})
      if (k <= n) d.recall_at[k] = recall_at_k(Sd, k, Direction::TextToMol);
    d.mrr = mrr(Sd, Direction::TextToMol);
    d.cmc_global = cmc_curve(Sd, std::min(k_max, n));
    if (rep.n_grouped_queries > 0) {
      d.grouped_recall1 = grouped_recall_at_1(Sd, target_ids, min_group);
      d.cmc_grouped = cmc_curve_grouped(
          Sd, target_ids, std::min<int>(10, static_cast<int>(max_group)), min_group);
    }
    if (bootstrap_B > 0) {
      d.bootstrap["recall@1"] = {0, 0, bootstrap_B, seed};
      std::tie(d.bootstrap["recall@1"].lo, d.bootstrap["recall@1"].hi) =
          bootstrap_ci("recall@1", Sd, target_ids, bootstrap_B, 0.95, seed, min_group);
      d.bootstrap["mrr"] = {0, 0, bootstrap_B, seed};
      std::tie(d.bootstrap["mrr"].lo, d.bootstrap["mrr"].hi) =
          bootstrap_ci("mrr", Sd, target_ids, bootstrap_B, 0.95, seed, min_group);
      if (d.grouped_recall1) {
        d.bootstrap["grouped_recall@1"] = {0, 0, bootstrap_B, seed};
        std::tie(d.bootstrap["grouped_recall@1"].lo, d.bootstrap["grouped_recall@1"].hi) =
            bootstrap_ci("grouped_recall@1", Sd, target_ids, bootstrap_B, 0.95, seed, min_group);
      }
    }
    return d;
  };
  rep.text_to_mol = fill(S);
  rep.mol_to_text = fill(MatrixF(S.transpose()));
  return rep;
}

namespace {

nlohmann::json direction_to_json(const DirectionReport& d) {
  nlohmann::json j;
  for (const auto& [k, v] : d.recall_at) j["recall_at"][std::to_string(k)] = v;
  j["mrr"] = d.mrr;
  if (d.grouped_recall1)
    j["grouped_recall1"] = *d.grouped_recall1;
  else
    j["grouped_recall1"] = nullptr;
  for (const auto& [name, ci] : d.bootstrap)
    j["bootstrap"][name] = {{"lo", ci.lo}, {"hi", ci.hi}, {"B", ci.B}, {"seed", ci.seed}};
  j["cmc_global"] = d.cmc_global;
  j["cmc_grouped"] = d.cmc_grouped;
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["n_queries"] = r.n_queries;
  j["n_grouped_queries"] = r.n_grouped_queries;
  j["min_group"] = r.min_group;
  j["text_to_mol"] = direction_to_json(r.text_to_mol);
  j["mol_to_text"] = direction_to_json(r.mol_to_text);
  return j.dump(2) + "\n";
}

void save_report(const std::filesystem::path& path, const EvalReport& r) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string s = report_to_json(r);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

void save_cmc_csv(const std::filesystem::path& path, const EvalReport& r) {
  std::string out = "direction,scope,k,recall\n";
  auto emit = [&](const char* dir, const char* scope, const std::vector<double>& curve) {
    char buf[64];
    for (size_t i = 0; i < curve.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f\n", dir, scope, i + 1, curve[i]);
      out += buf;
    }
  };
  emit("text_to_mol", "global", r.text_to_mol.cmc_global);
  emit("text_to_mol", "grouped", r.text_to_mol.cmc_grouped);
  emit("mol_to_text", "global", r.mol_to_text.cmc_global);
  emit("mol_to_text", "grouped", r.mol_to_text.cmc_grouped);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace chembridge::eval
