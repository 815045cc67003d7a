// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/bridge.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "chembridge/errors.hpp"
#include "chembridge/rng.hpp"

namespace chembridge::bridge {
namespace {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Projects rows of X through W and L2-normalizes them; optionally reports
// the pre-normalization row norms (needed for the backward pass).
template <typename Scalar>
Mat<Scalar> project_rows(const Mat<Scalar>& X, const Mat<Scalar>& W, Vec<Scalar>* norms_out) {
  if (X.cols() != W.cols())
    throw DataError("projection shape mismatch: input dim " + std::to_string(X.cols()) +
                    " vs weight dim " + std::to_string(W.cols()));
  Mat<Scalar> U = X * W.transpose();
  Vec<Scalar> norms = U.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > Scalar(1e-30)))
      throw NumericError("zero-norm projected row " + std::to_string(i) +
                         " (degenerate input, e.g. all-zero fingerprint)");
  }
  Mat<Scalar> B = U;
  B.array().colwise() /= norms.array();
  if (norms_out) *norms_out = std::move(norms);
  return B;
}

// Same-target ordered pairs (i, j), i != j, as flat i*n+j codes.
std::vector<std::vector<int>> same_target_lists(const std::vector<std::string>& ids) {
  const int n = static_cast<int>(ids.size());
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && ids[i] == ids[j]) out[i].push_back(j);
  return out;
}

template <typename Scalar>
void check_finite(const Mat<Scalar>& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite ") + what);
}

// Uniform +/- sqrt(6/(rows+cols)) fill drawing from an existing stream.
BridgeParams fill_params(int d, int D_text, int D_mol, Xoshiro256& rng) {
  if (d < 1 || D_text < 1 || D_mol < 1) throw DataError("init_params dims must be >= 1");
  auto fill = [&](MatrixF& W, int rows, int cols) {
    W.resize(rows, cols);
    const double bound = std::sqrt(6.0 / (rows + cols));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        W(i, j) = static_cast<float>(bound * (2.0 * rng.next_double() - 1.0));
  };
  BridgeParams p;
  p.d = d;
  fill(p.W_T, d, D_text);
  fill(p.W_M, d, D_mol);
  return p;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.dim < 1) throw DataError("projection dim must be >= 1");
  if (!(cfg.temperature > 0)) throw DataError("temperature must be > 0");
  if (cfg.hard_negative_beta < 1) throw DataError("hard_negative_beta must be >= 1");
  if (cfg.margin < 0) throw DataError("margin must be >= 0");
  if (cfg.margin_weight < 0) throw DataError("margin_weight must be >= 0");
  if (cfg.epochs < 0) throw DataError("epochs must be >= 0");
  if (cfg.batch_size < 2) throw DataError("batch_size must be >= 2");
  if (!(cfg.lr > 0)) throw DataError("lr must be > 0");
  if (cfg.weight_decay < 0) throw DataError("weight_decay must be >= 0");
}

BridgeParams init_params(int d, int D_text, int D_mol, uint64_t seed) {
  Xoshiro256 rng(seed);
  return fill_params(d, D_text, D_mol, rng);
}

MatrixF project(const MatrixF& W, const MatrixF& X) {
  return project_rows<float>(X, W, nullptr);
}

template <typename Scalar>
Mat<Scalar> negative_weights(const std::vector<std::string>& target_ids, double beta) {
  if (target_ids.empty()) throw DataError("negative_weights needs at least one row");
  if (beta < 1) throw DataError("hard_negative_beta must be >= 1");
  const int n = static_cast<int>(target_ids.size());
  Mat<Scalar> w = Mat<Scalar>::Constant(n, n, Scalar(1));
  const Scalar b = static_cast<Scalar>(beta);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && target_ids[i] == target_ids[j]) w(i, j) = b;
  return w;
}

template <typename Scalar>
std::pair<Scalar, Mat<Scalar>> margin_penalty(const Mat<Scalar>& S,
                                              const std::vector<std::string>& target_ids,
                                              Scalar m) {
  if (S.rows() != S.cols()) throw DataError("margin_penalty needs a square matrix");
  const int n = static_cast<int>(S.rows());
  if (static_cast<int>(target_ids.size()) != n)
    throw DataError("margin_penalty: target id count does not match matrix size");
  Mat<Scalar> grad = Mat<Scalar>::Zero(n, n);
  const auto pairs = same_target_lists(target_ids);
  long n_pairs = 0;
  for (const auto& js : pairs) n_pairs += static_cast<long>(js.size());
  if (n_pairs == 0) return {Scalar(0), std::move(grad)};
  Scalar total = 0;
  const Scalar inv = Scalar(1) / static_cast<Scalar>(n_pairs);
  for (int i = 0; i < n; ++i) {
    for (int j : pairs[i]) {
      const Scalar slack = m - (S(i, i) - S(i, j));
      if (slack > Scalar(0)) {  // strict: subgradient 0 at the kink
        total += slack;
        grad(i, i) -= inv;
        grad(i, j) += inv;
      }
    }
  }
  return {total * inv, std::move(grad)};
}

template <typename Scalar>
LossResult<Scalar> bridge_loss(const Mat<Scalar>& B_T, const Mat<Scalar>& B_M,
                               const Mat<Scalar>& weights, const TrainConfig& cfg,
                               const std::vector<std::string>& target_ids) {
  const int n = static_cast<int>(B_T.rows());
  if (B_M.rows() != n) throw DataError("bridge_loss: row counts differ");
  if (B_T.cols() != B_M.cols()) throw DataError("bridge_loss: embedding dims differ");
  if (weights.rows() != n || weights.cols() != n)
    throw DataError("bridge_loss: weight matrix shape mismatch");
  if (static_cast<int>(target_ids.size()) != n)
    throw DataError("bridge_loss: target id count mismatch");
  if (!(cfg.temperature > 0)) throw DataError("temperature must be > 0");

  const Scalar invT = Scalar(1) / static_cast<Scalar>(cfg.temperature);
  Mat<Scalar> S = B_T * B_M.transpose();
  check_finite(S, "similarity matrix");

  // One InfoNCE direction: rows of R against weights Wm; returns the summed
  // row losses and writes the weighted softmax into P.
  auto direction = [&](const Mat<Scalar>& R, const Mat<Scalar>& Wm, Mat<Scalar>& P) {
    P.resize(n, n);
    Scalar total = 0;
    for (int i = 0; i < n; ++i) {
      Scalar mx = -std::numeric_limits<Scalar>::infinity();
      for (int j = 0; j < n; ++j) mx = std::max(mx, R(i, j) * invT);
      Scalar sum = 0;
      for (int j = 0; j < n; ++j) {
        const Scalar e = Wm(i, j) * std::exp(R(i, j) * invT - mx);
        P(i, j) = e;
        sum += e;
      }
      total += -R(i, i) * invT + mx + std::log(sum);
      P.row(i) /= sum;
    }
    return total;
  };

  Mat<Scalar> P, Q;
  const Scalar l_tm = direction(S, weights, P);
  const Mat<Scalar> St = S.transpose();
  const Mat<Scalar> Wt = weights.transpose();
  const Scalar l_mt = direction(St, Wt, Q);

  LossResult<Scalar> out;
  out.infonce = (l_tm + l_mt) / Scalar(2 * n);

  const Scalar scale = invT / Scalar(2 * n);
  Mat<Scalar> G = (P + Q.transpose()) * scale;
  for (int i = 0; i < n; ++i) G(i, i) -= Scalar(2) * scale;

  const Scalar lambda = static_cast<Scalar>(cfg.margin_weight);
  if (lambda > 0) {
    auto [mval, mgrad] = margin_penalty<Scalar>(S, target_ids, static_cast<Scalar>(cfg.margin));
    out.margin = mval;
    G += lambda * mgrad;
  }
  out.loss = out.infonce + lambda * out.margin;
  if (!std::isfinite(static_cast<double>(out.loss))) throw NumericError("non-finite loss");

  out.grad_T = G * B_M;
  out.grad_M = G.transpose() * B_T;
  check_finite(out.grad_T, "text gradient");
  check_finite(out.grad_M, "molecule gradient");
  return out;
}

namespace {

template <typename Scalar>
struct ParamGrads {
  Scalar loss = 0;
  Scalar infonce = 0;
  Scalar margin = 0;
  Mat<Scalar> gW_T;
  Mat<Scalar> gW_M;
};

// Full forward/backward through projection + normalization + loss, giving
// gradients w.r.t. the weight matrices.
template <typename Scalar>
ParamGrads<Scalar> loss_and_param_grads(const Mat<Scalar>& W_T, const Mat<Scalar>& W_M,
                                        const Mat<Scalar>& Z, const Mat<Scalar>& X,
                                        const Mat<Scalar>& weights, const TrainConfig& cfg,
                                        const std::vector<std::string>& target_ids) {
  Vec<Scalar> n_T, n_M;
  const Mat<Scalar> B_T = project_rows<Scalar>(Z, W_T, &n_T);
  const Mat<Scalar> B_M = project_rows<Scalar>(X, W_M, &n_M);
  LossResult<Scalar> lr = bridge_loss<Scalar>(B_T, B_M, weights, cfg, target_ids);

  const int n = static_cast<int>(Z.rows());
  const int d = static_cast<int>(W_T.rows());
  Mat<Scalar> GU_T(n, d), GU_M(n, d);
  for (int i = 0; i < n; ++i) {
    // b = u/|u|  =>  dL/du = (dL/db - (dL/db . b) b) / |u|
    const Scalar dot_t = lr.grad_T.row(i).dot(B_T.row(i));
    GU_T.row(i) = (lr.grad_T.row(i) - dot_t * B_T.row(i)) / n_T[i];
    const Scalar dot_m = lr.grad_M.row(i).dot(B_M.row(i));
    GU_M.row(i) = (lr.grad_M.row(i) - dot_m * B_M.row(i)) / n_M[i];
  }
  ParamGrads<Scalar> out;
  out.loss = lr.loss;
  out.infonce = lr.infonce;
  out.margin = lr.margin;
  out.gW_T = GU_T.transpose() * Z;
  out.gW_M = GU_M.transpose() * X;
  return out;
}

// Loss value only, plus (when lambda > 0) the set of active margin hinges —
// used by the finite-difference check to discard samples that step across a
// kink.
template <typename Scalar>
Scalar forward_loss(const Mat<Scalar>& W_T, const Mat<Scalar>& W_M, const Mat<Scalar>& Z,
                    const Mat<Scalar>& X, const Mat<Scalar>& weights, const TrainConfig& cfg,
                    const std::vector<std::string>& target_ids,
                    std::vector<long>* active_out) {
  const Mat<Scalar> B_T = project_rows<Scalar>(Z, W_T, nullptr);
  const Mat<Scalar> B_M = project_rows<Scalar>(X, W_M, nullptr);
  LossResult<Scalar> lr = bridge_loss<Scalar>(B_T, B_M, weights, cfg, target_ids);
  if (active_out && cfg.margin_weight > 0) {
    active_out->clear();
    const Mat<Scalar> S = B_T * B_M.transpose();
    const int n = static_cast<int>(S.rows());
    const auto pairs = same_target_lists(target_ids);
    const Scalar m = static_cast<Scalar>(cfg.margin);
    for (int i = 0; i < n; ++i)
      for (int j : pairs[i])
        if (m - (S(i, i) - S(i, j)) > Scalar(0))
          active_out->push_back(static_cast<long>(i) * n + j);
  }
  return lr.loss;
}

}  // namespace

std::pair<BridgeParams, TrainHistory> train(const MatrixF& mol_X, const MatrixF& text_Z,
                                            const std::vector<std::string>& target_ids,
                                            const TrainConfig& cfg) {
  validate(cfg);
  const int n = static_cast<int>(mol_X.rows());
  if (text_Z.rows() != n) throw DataError("train: molecule/text row counts differ");
  if (static_cast<int>(target_ids.size()) != n) throw DataError("train: target id count mismatch");
  if (n < 2) throw DataError("train needs at least 2 aligned pairs");

  // One stream drives everything: init consumes first, epoch shuffles follow.
  Xoshiro256 rng(cfg.seed);
  BridgeParams params = fill_params(cfg.dim, static_cast<int>(text_Z.cols()),
                                    static_cast<int>(mol_X.cols()), rng);

  TrainHistory hist;
  if (cfg.epochs == 0) return {std::move(params), std::move(hist)};

  MatrixF m_T = MatrixF::Zero(params.W_T.rows(), params.W_T.cols());
  MatrixF v_T = m_T, m_M = MatrixF::Zero(params.W_M.rows(), params.W_M.cols()), v_M = m_M;
  long t = 0;
  const float b1 = static_cast<float>(cfg.adam_beta1);
  const float b2 = static_cast<float>(cfg.adam_beta2);
  const float eps = static_cast<float>(cfg.adam_eps);
  const float lr = static_cast<float>(cfg.lr);
  const float wd = static_cast<float>(cfg.weight_decay);

  auto adamw_step = [&](MatrixF& W, MatrixF& m, MatrixF& v, const MatrixF& g) {
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.cwiseProduct(g);
    const float c1 = 1.0f - std::pow(b1, static_cast<float>(t));
    const float c2 = 1.0f - std::pow(b2, static_cast<float>(t));
    const MatrixF update =
        (m / c1).cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix()) + wd * W;
    W -= lr * update;
    check_finite(W, "parameters after update");
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> perm = shuffled_indices(n, rng);
    double ep_loss = 0, ep_nce = 0, ep_margin = 0;
    long used = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int nb = std::min(cfg.batch_size, n - start);
      if (nb < 2) break;  // a batch of 1 has no negatives
      MatrixF Xb(nb, mol_X.cols()), Zb(nb, text_Z.cols());
      std::vector<std::string> ids_b(nb);
      for (int i = 0; i < nb; ++i) {
        const int r = perm[start + i];
        Xb.row(i) = mol_X.row(r);
        Zb.row(i) = text_Z.row(r);
        ids_b[i] = target_ids[r];
      }
      const MatrixF w = negative_weights<float>(ids_b, cfg.hard_negative_beta);
      ParamGrads<float> pg =
          loss_and_param_grads<float>(params.W_T, params.W_M, Zb, Xb, w, cfg, ids_b);
      ++t;
      adamw_step(params.W_T, m_T, v_T, pg.gW_T);
      adamw_step(params.W_M, m_M, v_M, pg.gW_M);
      ep_loss += static_cast<double>(pg.loss) * nb;
      ep_nce += static_cast<double>(pg.infonce) * nb;
      ep_margin += static_cast<double>(pg.margin) * nb;
      used += nb;
    }
    if (used == 0) throw DataError("train: no batch of size >= 2 could be formed");
    hist.loss.push_back(ep_loss / used);
    hist.infonce.push_back(ep_nce / used);
    hist.margin.push_back(ep_margin / used);
  }

  if (!hist.loss.empty() && hist.loss.back() > hist.loss.front()) {
    std::cerr << "warning: final epoch loss " << hist.loss.back()
              << " exceeds first epoch loss " << hist.loss.front() << "\n";
  }
  return {std::move(params), std::move(hist)};
}

double grad_check(const BridgeParams& params, const MatrixF& mol_X, const MatrixF& text_Z,
                  const std::vector<std::string>& target_ids, const TrainConfig& cfg,
                  double eps) {
  if (mol_X.rows() < 2) throw DataError("grad_check needs a batch of >= 2");
  if (!(eps > 0)) throw DataError("grad_check eps must be > 0");
  const MatrixD Z = text_Z.cast<double>();
  const MatrixD X = mol_X.cast<double>();
  MatrixD W_T = params.W_T.cast<double>();
  MatrixD W_M = params.W_M.cast<double>();
  const MatrixD w = negative_weights<double>(target_ids, cfg.hard_negative_beta);

  const ParamGrads<double> an =
      loss_and_param_grads<double>(W_T, W_M, Z, X, w, cfg, target_ids);

  Xoshiro256 rng(cfg.seed);
  double worst = 0.0;
  auto probe = [&](MatrixD& W, const MatrixD& analytic, int samples) {
    const int rows = static_cast<int>(W.rows());
    const int cols = static_cast<int>(W.cols());
    for (int s = 0; s < samples; ++s) {
      const int r = static_cast<int>(rng.next_below(static_cast<uint64_t>(rows)));
      const int c = static_cast<int>(rng.next_below(static_cast<uint64_t>(cols)));
      const double saved = W(r, c);
      std::vector<long> act_plus, act_minus;
      W(r, c) = saved + eps;
      const double lp = forward_loss<double>(W_T, W_M, Z, X, w, cfg, target_ids, &act_plus);
      W(r, c) = saved - eps;
      const double lm = forward_loss<double>(W_T, W_M, Z, X, w, cfg, target_ids, &act_minus);
      W(r, c) = saved;
      if (cfg.margin_weight > 0 && act_plus != act_minus) continue;  // stepped over a kink
      const double fd = (lp - lm) / (2.0 * eps);
      const double ga = analytic(r, c);
      const double rel = std::abs(ga - fd) / std::max(1e-12, std::abs(ga) + std::abs(fd));
      worst = std::max(worst, rel);
    }
  };
  probe(W_T, an.gW_T, 128);
  probe(W_M, an.gW_M, 128);
  return worst;
}

namespace {

void append_u32le(std::string& buf, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.append(b, 4);
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{{"dim", c.dim},
                        {"temperature", c.temperature},
                        {"lr", c.lr},
                        {"weight_decay", c.weight_decay},
                        {"epochs", c.epochs},
                        {"batch_size", c.batch_size},
                        {"hard_negative_beta", c.hard_negative_beta},
                        {"margin", c.margin},
                        {"margin_weight", c.margin_weight},
                        {"seed", c.seed},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"adam_eps", c.adam_eps}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig d;
  TrainConfig c;
  c.dim = j.value("dim", d.dim);
  c.temperature = j.value("temperature", d.temperature);
  c.lr = j.value("lr", d.lr);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.hard_negative_beta = j.value("hard_negative_beta", d.hard_negative_beta);
  c.margin = j.value("margin", d.margin);
  c.margin_weight = j.value("margin_weight", d.margin_weight);
  c.seed = j.value("seed", d.seed);
  c.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
  return c;
}

}  // namespace

void save_params(const std::filesystem::path& path, const BridgeParams& params,
                 const TrainConfig& cfg) {
  if (params.W_T.rows() != params.d || params.W_M.rows() != params.d)
    throw DataError("checkpoint: weight row counts do not match d");
  std::string buf;
  buf.append("BRG1", 4);
  append_u32le(buf, static_cast<uint32_t>(params.d));
  append_u32le(buf, static_cast<uint32_t>(params.W_T.cols()));
  append_u32le(buf, static_cast<uint32_t>(params.W_M.cols()));
  buf.append(reinterpret_cast<const char*>(params.W_T.data()),
             static_cast<size_t>(params.W_T.size()) * 4);
  buf.append(reinterpret_cast<const char*>(params.W_M.data()),
             static_cast<size_t>(params.W_M.size()) * 4);
  buf.append(config_to_json(cfg).dump());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::pair<BridgeParams, TrainConfig> load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = std::move(ss).str();
  if (buf.size() < 16 || buf.compare(0, 4, "BRG1") != 0)
    throw SchemaError(path.string() + ": not a BRG1 checkpoint");
  uint32_t d, dt, dm;
  std::memcpy(&d, buf.data() + 4, 4);
  std::memcpy(&dt, buf.data() + 8, 4);
  std::memcpy(&dm, buf.data() + 12, 4);
  const size_t wt_bytes = static_cast<size_t>(d) * dt * 4;
  const size_t wm_bytes = static_cast<size_t>(d) * dm * 4;
  if (buf.size() < 16 + wt_bytes + wm_bytes)
    throw SchemaError(path.string() + ": truncated checkpoint payload");
  BridgeParams p;
  p.d = static_cast<int>(d);
  p.W_T.resize(d, dt);
  p.W_M.resize(d, dm);
  std::memcpy(p.W_T.data(), buf.data() + 16, wt_bytes);
  std::memcpy(p.W_M.data(), buf.data() + 16 + wt_bytes, wm_bytes);
  if (!p.W_T.allFinite() || !p.W_M.allFinite())
    throw NumericError(path.string() + ": checkpoint weights contain non-finite values");
  TrainConfig cfg;
  const std::string trailer = buf.substr(16 + wt_bytes + wm_bytes);
  if (!trailer.empty()) {
    nlohmann::json j = nlohmann::json::parse(trailer, nullptr, false);
    if (j.is_discarded())
      throw SchemaError(path.string() + ": malformed config trailer");
    cfg = config_from_json(j);
  }
  return {std::move(p), cfg};
}

template Mat<float> negative_weights<float>(const std::vector<std::string>&, double);
template Mat<double> negative_weights<double>(const std::vector<std::string>&, double);
template std::pair<float, Mat<float>> margin_penalty<float>(const Mat<float>&,
                                                            const std::vector<std::string>&,
                                                            float);
template std::pair<double, Mat<double>> margin_penalty<double>(const Mat<double>&,
                                                               const std::vector<std::string>&,
                                                               double);
template LossResult<float> bridge_loss<float>(const Mat<float>&, const Mat<float>&,
                                              const Mat<float>&, const TrainConfig&,
                                              const std::vector<std::string>&);
template LossResult<double> bridge_loss<double>(const Mat<double>&, const Mat<double>&,
                                                const Mat<double>&, const TrainConfig&,
                                                const std::vector<std::string>&);

}  // namespace chembridge::bridge
