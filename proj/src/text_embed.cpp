// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/text_embed.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "chembridge/errors.hpp"
#include "chembridge/hash.hpp"

namespace chembridge::embed {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return std::move(ss).str();
}

uint32_t read_u32(const std::string& buf, size_t off) {
  uint32_t v;
  std::memcpy(&v, buf.data() + off, 4);
  return v;
}

void append_u32(std::string& buf, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.append(b, 4);
}

}  // namespace

EmbeddingMatrix read_emb1(const std::filesystem::path& path) {
  const std::string buf = read_all(path);
  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw SchemaError(path.string() + ": not an EMB1 file");
  const uint32_t n = read_u32(buf, 4);
  const uint32_t d = read_u32(buf, 8);
  if (d == 0) throw SchemaError(path.string() + ": zero embedding dim");

  EmbeddingMatrix m;
  m.row_ids.reserve(n);
  size_t off = 12;
  for (uint32_t i = 0; i < n; ++i) {
    if (off + 2 > buf.size())
      throw SchemaError(path.string() + ": truncated id table");
    uint16_t len;
    std::memcpy(&len, buf.data() + off, 2);
    off += 2;
    if (off + len > buf.size())
      throw SchemaError(path.string() + ": truncated id table");
    m.row_ids.emplace_back(buf.data() + off, len);
    off += len;
  }
  const size_t need = static_cast<size_t>(n) * d * 4;
  if (buf.size() - off != need)
    throw SchemaError(path.string() + ": payload size mismatch (expected " +
                      std::to_string(need) + " value bytes, found " +
                      std::to_string(buf.size() - off) + ")");
  m.values.resize(n, d);
  if (need > 0) std::memcpy(m.values.data(), buf.data() + off, need);
  return m;
}

void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  if (static_cast<size_t>(m.values.rows()) != m.row_ids.size())
    throw DataError("embedding row count does not match id count");
  std::string buf;
  buf.append(kMagic, 4);
  append_u32(buf, static_cast<uint32_t>(m.rows()));
  append_u32(buf, static_cast<uint32_t>(m.dim()));
  for (const auto& id : m.row_ids) {
    if (id.size() > 0xffff) throw DataError("embedding id longer than 65535 bytes");
    uint16_t len = static_cast<uint16_t>(id.size());
    char b[2];
    std::memcpy(b, &len, 2);
    buf.append(b, 2);
    buf.append(id);
  }
  buf.append(reinterpret_cast<const char*>(m.values.data()),
             static_cast<size_t>(m.rows()) * m.dim() * 4);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

EmbeddingMatrix read_tsv(const std::filesystem::path& path) {
  const std::string buf = read_all(path);
  EmbeddingMatrix m;
  std::vector<std::vector<float>> rows;
  size_t pos = 0;
  int line_no = 0;
  int dim = -1;
  while (pos < buf.size()) {
    size_t eol = buf.find('\n', pos);
    if (eol == std::string::npos) eol = buf.size();
    size_t end = eol;
    if (end > pos && buf[end - 1] == '\r') --end;
    std::string_view line(buf.data() + pos, end - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.substr(0, 3) != "id\t")
        throw SchemaError(path.string() + ": embedding TSV must start with an 'id' column");
      continue;
    }
    std::vector<float> vals;
    size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw SchemaError(path.string() + ": line " + std::to_string(line_no) +
                        " has no value columns");
    m.row_ids.emplace_back(line.substr(0, tab));
    size_t p = tab + 1;
    while (true) {
      size_t next = line.find('\t', p);
      std::string tok(line.substr(p, next == std::string_view::npos ? next : next - p));
      try {
        size_t used = 0;
        float v = std::stof(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        vals.push_back(v);
      } catch (const std::exception&) {
        throw SchemaError(path.string() + ": line " + std::to_string(line_no) +
                          ": bad float '" + tok + "'");
      }
      if (next == std::string_view::npos) break;
      p = next + 1;
    }
    if (dim < 0) dim = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != dim)
      throw SchemaError(path.string() + ": line " + std::to_string(line_no) +
                        " has " + std::to_string(vals.size()) + " values, expected " +
                        std::to_string(dim));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw SchemaError(path.string() + ": no embedding rows");
  m.values.resize(static_cast<int>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < dim; ++j) m.values(static_cast<int>(i), j) = rows[i][j];
  return m;
}

EmbeddingMatrix read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char head[4] = {0, 0, 0, 0};
  in.read(head, 4);
  in.close();
  if (std::memcmp(head, kMagic, 4) == 0) return read_emb1(path);
  return read_tsv(path);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const ingest::Dataset& dataset) {
  EmbeddingMatrix raw = read_embedding_file(path);
  std::unordered_map<std::string, int> by_id;
  by_id.reserve(raw.row_ids.size());
  for (int i = 0; i < raw.rows(); ++i) {
    auto [it, inserted] = by_id.emplace(raw.row_ids[i], i);
    if (!inserted)
      throw DataError(path.string() + ": duplicate embedding id '" + raw.row_ids[i] + "'");
  }
  std::unordered_map<std::string, int> wanted;
  wanted.reserve(dataset.records.size());
  for (size_t r = 0; r < dataset.records.size(); ++r)
    wanted.emplace(ingest::record_id(dataset.records[r]), static_cast<int>(r));
  for (int i = 0; i < raw.rows(); ++i)
    if (!wanted.count(raw.row_ids[i]))
      throw DataError(path.string() + ": embedding row " + std::to_string(i) +
                      " has unknown id '" + raw.row_ids[i] + "'");

  EmbeddingMatrix out;
  out.values.resize(static_cast<int>(dataset.records.size()), raw.dim());
  out.row_ids.reserve(dataset.records.size());
  for (size_t r = 0; r < dataset.records.size(); ++r) {
    const std::string id = ingest::record_id(dataset.records[r]);
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw DataError(path.string() + ": no embedding for record " +
                      std::to_string(r) + " ('" + id + "')");
    if (!raw.values.row(it->second).allFinite())
      throw NumericError(path.string() + ": non-finite value in embedding row for record " +
                         std::to_string(r) + " ('" + id + "')");
    out.values.row(static_cast<int>(r)) = raw.values.row(it->second);
    out.row_ids.push_back(id);
  }
  return out;
}

Eigen::VectorXf hash_embed(std::string_view text, int dim) {
  if (dim < 64 || (dim & (dim - 1)) != 0)
    throw DataError("hash_embed dim must be a power of two >= 64");
  Eigen::VectorXf v = Eigen::VectorXf::Zero(dim);
  std::string token;
  int n_tokens = 0;
  auto flush = [&] {
    if (token.empty()) return;
    const uint32_t h = fnv1a32(token);
    const int idx = static_cast<int>(h & static_cast<uint32_t>(dim - 1));
    v[idx] += (h & 1u) ? 1.0f : -1.0f;
    ++n_tokens;
    token.clear();
  };
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      token.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  if (n_tokens == 0) throw DataError("hash_embed: text has no tokens");
  const float norm = v.norm();
  if (!(norm > 0.0f))
    throw NumericError("hash_embed: token signs cancel to a zero vector");
  v /= norm;
  return v;
}

}  // namespace chembridge::embed
