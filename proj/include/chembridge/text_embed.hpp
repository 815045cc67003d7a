// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chembridge/data_ingest.hpp"

namespace chembridge::embed {

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-aligned embedding matrix with one id per row.
struct EmbeddingMatrix {
  MatrixF values;
  std::vector<std::string> row_ids;

  int rows() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

// EMB1 binary layout (little-endian): magic "EMB1", u32 N, u32 D,
// N id records (u16 length + UTF-8 bytes), N*D float32 row-major.
EmbeddingMatrix read_emb1(const std::filesystem::path& path);
void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m);

// TSV alternative: header "id\tv0...v{D-1}", one row per id.
EmbeddingMatrix read_tsv(const std::filesystem::path& path);

// Reads EMB1 or TSV (sniffed via the magic bytes).
EmbeddingMatrix read_embedding_file(const std::filesystem::path& path);

// Reads a file and joins it to the dataset by record id; rows come back
// in dataset order. Ids must match the dataset exactly (no missing, no
// unknown) and all values must be finite.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const ingest::Dataset& dataset);

// Deterministic fallback text embedder: lowercase, split on
// non-alphanumeric bytes, then signed feature hashing of term
// frequencies (FNV-1a bit 0 picks the sign, FNV-1a mod dim the index),
// L2-normalized. dim must be a power of two >= 64.
Eigen::VectorXf hash_embed(std::string_view text, int dim);

}  // namespace chembridge::embed
