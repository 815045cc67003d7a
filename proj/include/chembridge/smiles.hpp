// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chembridge/errors.hpp"

namespace chembridge::smiles {

enum class BondOrder : uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

// Numeric code used in hashed environments: single=1 double=2 triple=3 aromatic=4.
inline uint32_t bond_code(BondOrder o) { return static_cast<uint32_t>(o); }

// Contribution to the valence sum; aromatic bonds count 1.5.
inline double bond_valence(BondOrder o) {
  return o == BondOrder::Aromatic ? 1.5 : static_cast<double>(bond_code(o));
}

struct Atom {
  int element = 0;      // atomic number
  int charge = 0;
  int explicit_h = 0;   // bracket H-count; zero for organic-subset atoms
  int implicit_h = 0;   // computed from default valence; zero for bracket atoms
  int isotope = 0;      // parsed but excluded from fingerprint invariants
  int degree = 0;       // heavy-atom neighbours
  bool aromatic = false;
  bool bracket = false;
  bool in_ring = false;

  int total_h() const { return explicit_h + implicit_h; }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
  bool in_ring = false;
};

struct Neighbor {
  int atom = 0;
  int bond = 0;
};

struct MoleculeGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<std::vector<Neighbor>> adjacency;

  int atom_count() const { return static_cast<int>(atoms.size()); }
  int bond_count() const { return static_cast<int>(bonds.size()); }
  bool empty() const { return atoms.empty(); }

  // Rebuilds adjacency and heavy-atom degrees from the bond list.
  void rebuild_adjacency();
};

// Parse error carrying the byte offset into the input string.
class SmilesError : public DataError {
 public:
  SmilesError(const std::string& msg, size_t offset)
      : DataError(msg + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

// Multi-component inputs ('.'): either keep the largest component
// (ties by lexicographically smallest element multiset) or keep all.
enum class SaltPolicy { KeepLargest, KeepAll };

// Parses a practical SMILES subset: organic-subset atoms, bracket atoms
// with isotope/charge/H-count, branches, ring closures (digits and %nn),
// bond symbols - = # :, aromatic lowercase atoms, dot-separated
// components. Stereo markers (/ \ @ @@) are accepted and ignored.
// Implicit hydrogens and ring membership are filled in before returning.
MoleculeGraph parse_smiles(std::string_view text,
                           SaltPolicy policy = SaltPolicy::KeepLargest);

// Default-valence rule for non-bracket organic-subset atoms:
// default valence minus the (floored) bond-order sum, clamped at zero.
// Bracket atoms keep their written H-count and get no implicit Hs.
int implicit_hydrogens(const Atom& atom, double bond_order_sum);

// Marks atoms/bonds lying on at least one cycle. A bond is in a ring
// iff it is not a cut edge; an atom iff it has an in-ring incident bond.
void perceive_rings(MoleculeGraph& graph);

// Atomic number for an element symbol ("C", "Cl", ...), 0 if unknown.
int element_number(std::string_view symbol);
const std::string& element_symbol(int atomic_number);
int default_valence(int atomic_number);  // -1 when the element has none assigned

// Connected components as lists of atom indices, in first-seen order.
std::vector<std::vector<int>> connected_components(const MoleculeGraph& graph);

// Subgraph induced by `atom_indices` (order preserved, indices remapped).
// Degrees, adjacency and implicit hydrogens of non-bracket atoms are
// recomputed; ring flags are re-perceived.
MoleculeGraph induced_subgraph(const MoleculeGraph& graph,
                               const std::vector<int>& atom_indices);

}  // namespace chembridge::smiles
