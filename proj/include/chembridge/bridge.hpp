// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace chembridge::bridge {

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dual linear projection heads mapping text (D_text) and molecule (D_mol)
// inputs into a shared d-dimensional space.
struct BridgeParams {
  MatrixF W_T;  // d x D_text
  MatrixF W_M;  // d x D_mol
  int d = 256;
};

struct TrainConfig {
  int dim = 256;
  double temperature = 0.07;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  int epochs = 100;
  int batch_size = 512;
  double hard_negative_beta = 2.0;  // >= 1; 1 disables weighting
  double margin = 0.15;             // >= 0
  double margin_weight = 1.0;       // >= 0; 0 disables the margin term
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

void validate(const TrainConfig& cfg);

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> infonce;
  std::vector<double> margin;
};

template <typename Scalar>
struct LossResult {
  Scalar loss = 0;
  Scalar infonce = 0;
  Scalar margin = 0;
  Mat<Scalar> grad_T;  // dL/dB_T
  Mat<Scalar> grad_M;  // dL/dB_M
};

// Entries uniform in +/- sqrt(6 / (d + D_in)) per matrix, from one seeded
// stream (W_T filled first).
BridgeParams init_params(int d, int D_text, int D_mol, uint64_t seed);

// Rows of X * W^T, each L2-normalized. A zero-norm projected row (e.g. from
// an all-zero fingerprint) is a numeric error.
MatrixF project(const MatrixF& W, const MatrixF& X);

// w_ii = 1; w_ij = beta for same-target pairs (i != j), else 1.
template <typename Scalar>
Mat<Scalar> negative_weights(const std::vector<std::string>& target_ids, double beta);

// Hinge on the diagonal-vs-same-target-negative gap: mean over ordered
// same-target pairs (i,j), i != j, of max(0, m - (S_ii - S_ij)). Returns the
// value and its subgradient w.r.t. S (0 at the kink).
template <typename Scalar>
std::pair<Scalar, Mat<Scalar>> margin_penalty(const Mat<Scalar>& S,
                                              const std::vector<std::string>& target_ids,
                                              Scalar m);

// Weighted symmetric InfoNCE over S = B_T * B_M^T plus margin_weight times
// the margin penalty; per-direction row losses use max-subtracted logits.
// Returns analytic gradients w.r.t. both (already unit-norm) embedding blocks.
template <typename Scalar>
LossResult<Scalar> bridge_loss(const Mat<Scalar>& B_T, const Mat<Scalar>& B_M,
                               const Mat<Scalar>& weights, const TrainConfig& cfg,
                               const std::vector<std::string>& target_ids);

// Minibatch AdamW on (W_T, W_M): seeded epoch shuffles, in-batch negatives,
// last partial batch kept when >= 2 rows, decoupled weight decay. Arranged so
// that a fixed seed gives bitwise-identical parameters.
std::pair<BridgeParams, TrainHistory> train(const MatrixF& mol_X, const MatrixF& text_Z,
                                            const std::vector<std::string>& target_ids,
                                            const TrainConfig& cfg);

// Central finite differences at 64-bit over sampled entries of W_T and W_M
// (>= 200 total when the matrices are large enough). Entries whose +/- eps
// perturbations change the set of active margin hinges are excluded.
// Returns max |g_a - g_fd| / max(1e-12, |g_a| + |g_fd|).
double grad_check(const BridgeParams& params, const MatrixF& mol_X, const MatrixF& text_Z,
                  const std::vector<std::string>& target_ids, const TrainConfig& cfg,
                  double eps);

// Checkpoint: magic "BRG1", u32 d, u32 D_text, u32 D_mol, W_T then W_M as
// little-endian float32 row-major, then a JSON TrainConfig trailer.
void save_params(const std::filesystem::path& path, const BridgeParams& params,
                 const TrainConfig& cfg);
std::pair<BridgeParams, TrainConfig> load_params(const std::filesystem::path& path);

}  // namespace chembridge::bridge
