// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "chembridge/smiles.hpp"

namespace chembridge::fp {

// Fixed-width binary fingerprint. ECFP4 corresponds to radius 2.
struct Fingerprint {
  std::vector<uint64_t> words;
  int nbits = 2048;
  int radius = 2;

  void set(uint32_t bit) { words[bit >> 6] |= uint64_t{1} << (bit & 63); }
  bool test(uint32_t bit) const { return (words[bit >> 6] >> (bit & 63)) & 1; }
  int popcount() const;
  bool operator==(const Fingerprint&) const = default;
};

// Initial Morgan invariant: 32-bit FNV-1a over the little-endian tuple
// (element, degree, total H, charge, in_ring, aromatic).
uint32_t atom_invariant(const smiles::MoleculeGraph& graph, int atom_index);

// Deduplicated environment identifiers per radius 0..radius. An
// environment is dropped when its atom set was already produced at a
// smaller radius; equal atom sets within a radius keep the lowest
// identifier.
std::vector<std::vector<uint32_t>> ecfp_identifiers(const smiles::MoleculeGraph& graph,
                                                    int radius);

// Hashed Morgan fingerprint: every surviving identifier i sets bit
// (i mod nbits). nbits must be a power of two >= 64.
Fingerprint ecfp(const smiles::MoleculeGraph& graph, int radius = 2, int nbits = 2048);

// |a AND b| / |a OR b|; 1.0 when both fingerprints are empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace chembridge::fp
