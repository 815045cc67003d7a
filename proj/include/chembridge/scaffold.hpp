// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chembridge/smiles.hpp"

namespace chembridge::scaffold {

// Ring systems plus linkers: atoms of heavy-degree <= 1 that are not in
// a ring are deleted iteratively until fixpoint. Bond order of the
// removed atom is ignored (exocyclic =O is pruned too). Acyclic input
// yields the empty graph.
smiles::MoleculeGraph murcko_scaffold(const smiles::MoleculeGraph& graph);

// Canonical-by-refinement scaffold identity. Graph-isomorphic scaffolds
// (under WL refinement) share a key; collisions merge groups, which
// never breaks split disjointness. All acyclic molecules share the
// distinguished empty key.
struct ScaffoldKey {
  uint64_t hash = 0;
  bool empty = true;

  std::string str() const;
  static ScaffoldKey from_str(const std::string& s);
  bool operator==(const ScaffoldKey&) const = default;
  bool operator<(const ScaffoldKey& o) const {
    if (empty != o.empty) return empty;  // empty key sorts first
    return hash < o.hash;
  }
};

// Weisfeiler-Lehman key: initial labels (element, in_ring, aromatic,
// degree), 2*|atoms| refinement rounds over (bond code, neighbour label)
// multisets, hashed together with the sorted edge label pairs.
ScaffoldKey scaffold_key(const smiles::MoleculeGraph& scaffold_graph);

struct SplitAssignment {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  uint64_t seed = 0;
  double test_fraction = 0.0;
};

// Groups records by key and walks groups from smallest to largest
// (ties seed-shuffled), assigning whole groups to test until the test
// size reaches test_fraction * N. The empty-key group always goes to
// train. No key ever appears on both sides.
SplitAssignment scaffold_split(const std::vector<ScaffoldKey>& keys,
                               double test_fraction, uint64_t seed);

// Scaffold-free baseline: seeded shuffle, round(test_fraction * N)
// records to test.
SplitAssignment random_split(int n_records, double test_fraction, uint64_t seed);

}  // namespace chembridge::scaffold
