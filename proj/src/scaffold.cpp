// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/scaffold.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "chembridge/errors.hpp"
#include "chembridge/hash.hpp"
#include "chembridge/rng.hpp"

namespace chembridge::scaffold {

smiles::MoleculeGraph murcko_scaffold(const smiles::MoleculeGraph& g) {
  std::vector<bool> alive(g.atoms.size(), true);
  std::vector<int> degree(g.atoms.size());
  for (size_t a = 0; a < g.atoms.size(); ++a) degree[a] = g.atoms[a].degree;

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t a = 0; a < g.atoms.size(); ++a) {
      if (!alive[a] || g.atoms[a].in_ring || degree[a] > 1) continue;
      alive[a] = false;
      changed = true;
      for (const auto& nb : g.adjacency[a]) {
        if (alive[static_cast<size_t>(nb.atom)]) --degree[static_cast<size_t>(nb.atom)];
      }
    }
  }

  std::vector<int> keep;
  for (size_t a = 0; a < g.atoms.size(); ++a) {
    if (alive[a]) keep.push_back(static_cast<int>(a));
  }
  if (keep.empty()) return smiles::MoleculeGraph{};
  return smiles::induced_subgraph(g, keep);
}

std::string ScaffoldKey::str() const {
  if (empty) return "-";
  char buf[17] = {};
  for (int i = 0; i < 16; ++i) {
    buf[i] = "0123456789abcdef"[(hash >> (60 - 4 * i)) & 0xf];
  }
  return std::string(buf, 16);
}

ScaffoldKey ScaffoldKey::from_str(const std::string& s) {
  if (s == "-") return ScaffoldKey{};
  uint64_t h = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), h, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.size() != 16) {
    throw DataError("malformed scaffold key: " + s);
  }
  return ScaffoldKey{h, false};
}

ScaffoldKey scaffold_key(const smiles::MoleculeGraph& g) {
  if (g.empty()) return ScaffoldKey{};

  const size_t n = g.atoms.size();
  std::vector<uint64_t> labels(n);
  for (size_t a = 0; a < n; ++a) {
    const auto& atom = g.atoms[a];
    ByteHasher h;
    h.add_u32(static_cast<uint32_t>(atom.element));
    h.add_u32(atom.in_ring ? 1 : 0);
    h.add_u32(atom.aromatic ? 1 : 0);
    h.add_u32(static_cast<uint32_t>(atom.degree));
    labels[a] = h.hash64();
  }

  const int rounds = 2 * static_cast<int>(n);
  for (int round = 0; round < rounds; ++round) {
    std::vector<uint64_t> next(n);
    for (size_t a = 0; a < n; ++a) {
      std::vector<std::pair<uint32_t, uint64_t>> nbs;
      nbs.reserve(g.adjacency[a].size());
      for (const auto& nb : g.adjacency[a]) {
        nbs.emplace_back(smiles::bond_code(g.bonds[static_cast<size_t>(nb.bond)].order),
                         labels[static_cast<size_t>(nb.atom)]);
      }
      std::sort(nbs.begin(), nbs.end());
      ByteHasher h;
      h.add_u64(labels[a]);
      for (const auto& [code, label] : nbs) {
        h.add_u32(code);
        h.add_u64(label);
      }
      next[a] = h.hash64();
    }
    labels = std::move(next);
  }

  std::vector<uint64_t> sorted_labels = labels;
  std::sort(sorted_labels.begin(), sorted_labels.end());
  std::vector<std::tuple<uint32_t, uint64_t, uint64_t>> edges;
  edges.reserve(g.bonds.size());
  for (const auto& bond : g.bonds) {
    uint64_t la = labels[static_cast<size_t>(bond.a)];
    uint64_t lb = labels[static_cast<size_t>(bond.b)];
    edges.emplace_back(smiles::bond_code(bond.order), std::min(la, lb), std::max(la, lb));
  }
  std::sort(edges.begin(), edges.end());

  ByteHasher h;
  h.add_u64(static_cast<uint64_t>(n));
  for (uint64_t l : sorted_labels) h.add_u64(l);
  for (const auto& [code, lo, hi] : edges) {
    h.add_u32(code);
    h.add_u64(lo);
    h.add_u64(hi);
  }
  return ScaffoldKey{h.hash64(), false};
}

SplitAssignment scaffold_split(const std::vector<ScaffoldKey>& keys,
                               double test_fraction, uint64_t seed) {
  const int n = static_cast<int>(keys.size());
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DataError("test fraction must lie strictly between 0 and 1");
  }
  std::map<ScaffoldKey, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[keys[i]].push_back(i);
  if (groups.size() < 2) {
    throw DataError("cannot split: all records share one scaffold key");
  }

  SplitAssignment out;
  out.seed = seed;
  out.test_fraction = test_fraction;

  // The empty-scaffold group never represents an unseen chemical core.
  std::vector<std::pair<ScaffoldKey, std::vector<int>>> ordered;
  for (auto& [key, members] : groups) {
    if (key.empty) {
      out.train_indices.insert(out.train_indices.end(), members.begin(), members.end());
    } else {
      ordered.emplace_back(key, std::move(members));
    }
  }

  // Smallest groups first (ties in canonical key order, then shuffled),
  // so test collects rare scaffolds until it reaches the target size.
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second.size() != b.second.size()) return a.second.size() < b.second.size();
    return a.first < b.first;
  });
  Xoshiro256 rng(seed);
  for (size_t lo = 0; lo < ordered.size();) {
    size_t hi = lo + 1;
    while (hi < ordered.size() && ordered[hi].second.size() == ordered[lo].second.size()) ++hi;
    for (size_t i = hi - lo; i > 1; --i) {
      size_t j = static_cast<size_t>(rng.next_below(i));
      std::swap(ordered[lo + i - 1], ordered[lo + j]);
    }
    lo = hi;
  }

  const double target = test_fraction * static_cast<double>(n);
  size_t test_size = 0;
  for (const auto& [key, members] : ordered) {
    if (static_cast<double>(test_size) >= target) {
      out.train_indices.insert(out.train_indices.end(), members.begin(), members.end());
    } else {
      out.test_indices.insert(out.test_indices.end(), members.begin(), members.end());
      test_size += members.size();
    }
  }

  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  return out;
}

SplitAssignment random_split(int n_records, double test_fraction, uint64_t seed) {
  if (n_records < 2) throw DataError("split needs at least 2 records");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DataError("test_fraction must be in (0, 1)");
  Xoshiro256 rng(seed);
  std::vector<int> order = shuffled_indices(n_records, rng);
  const int n_test = std::max<int>(
      1, static_cast<int>(std::llround(test_fraction * static_cast<double>(n_records))));
  SplitAssignment out;
  out.seed = seed;
  out.test_fraction = test_fraction;
  out.test_indices.assign(order.begin(), order.begin() + n_test);
  out.train_indices.assign(order.begin() + n_test, order.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  return out;
}

}  // namespace chembridge::scaffold
