// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "chembridge/errors.hpp"
#include "chembridge/hash.hpp"

namespace chembridge::fp {

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::vector<int> set_union_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

int Fingerprint::popcount() const {
  int n = 0;
  for (uint64_t w : words) n += std::popcount(w);
  return n;
}

uint32_t atom_invariant(const smiles::MoleculeGraph& g, int atom_index) {
  const auto& atom = g.atoms[static_cast<size_t>(atom_index)];
  ByteHasher h;
  h.add_u32(static_cast<uint32_t>(atom.element));
  h.add_u32(static_cast<uint32_t>(atom.degree));
  h.add_u32(static_cast<uint32_t>(atom.total_h()));
  h.add_i32(atom.charge);
  h.add_u32(atom.in_ring ? 1 : 0);
  h.add_u32(atom.aromatic ? 1 : 0);
  return h.hash32();
}

std::vector<std::vector<uint32_t>> ecfp_identifiers(const smiles::MoleculeGraph& g,
                                                    int radius) {
  if (g.empty()) throw DataError("cannot fingerprint an empty graph");
  if (radius < 0) throw DataError("ecfp radius must be >= 0");
  const size_t n = g.atoms.size();

  std::vector<uint32_t> ids(n);
  std::vector<std::vector<int>> balls(n);  // sorted atom sets, grown per radius
  for (size_t a = 0; a < n; ++a) {
    ids[a] = atom_invariant(g, static_cast<int>(a));
    balls[a] = {static_cast<int>(a)};
  }

  std::vector<std::vector<uint32_t>> kept_per_radius;
  // Atom set -> radius of first appearance; duplicates never set new bits.
  std::map<std::vector<int>, int> seen_sets;

  for (int r = 0; r <= radius; ++r) {
    if (r > 0) {
      std::vector<uint32_t> next(n);
      std::vector<std::vector<int>> next_balls(n);
      for (size_t a = 0; a < n; ++a) {
        std::vector<std::pair<uint32_t, uint32_t>> nbs;
        nbs.reserve(g.adjacency[a].size());
        next_balls[a] = balls[a];
        for (const auto& nb : g.adjacency[a]) {
          nbs.emplace_back(smiles::bond_code(g.bonds[static_cast<size_t>(nb.bond)].order),
                           ids[static_cast<size_t>(nb.atom)]);
          next_balls[a] = set_union_sorted(next_balls[a], balls[static_cast<size_t>(nb.atom)]);
        }
        std::sort(nbs.begin(), nbs.end());
        ByteHasher h;
        h.add_u32(static_cast<uint32_t>(r));
        h.add_u32(ids[a]);
        for (const auto& [code, id] : nbs) {
          h.add_u32(code);
          h.add_u32(id);
        }
        next[a] = h.hash32();
      }
      ids = std::move(next);
      balls = std::move(next_balls);
    }

    // Dedup at this radius: same atom set keeps the lowest identifier.
    std::map<std::vector<int>, uint32_t> by_set;
    for (size_t a = 0; a < n; ++a) {
      if (seen_sets.count(balls[a])) continue;
      auto [it, inserted] = by_set.emplace(balls[a], ids[a]);
      if (!inserted) it->second = std::min(it->second, ids[a]);
    }
    std::vector<uint32_t> kept;
    kept.reserve(by_set.size());
    for (auto& [set, id] : by_set) {
      seen_sets.emplace(set, r);
      kept.push_back(id);
    }
    // Equal identifiers at one radius describe one environment.
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    kept_per_radius.push_back(std::move(kept));
  }
  return kept_per_radius;
}

Fingerprint ecfp(const smiles::MoleculeGraph& g, int radius, int nbits) {
  if (!power_of_two(nbits) || nbits < 64) {
    throw DataError("nbits must be a power of two >= 64, got " + std::to_string(nbits));
  }
  Fingerprint f;
  f.nbits = nbits;
  f.radius = radius;
  f.words.assign(static_cast<size_t>(nbits / 64), 0);
  for (const auto& ids : ecfp_identifiers(g, radius)) {
    for (uint32_t id : ids) f.set(id & static_cast<uint32_t>(nbits - 1));
  }
  return f;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits != b.nbits) {
    throw DataError("tanimoto: fingerprint widths differ (" + std::to_string(a.nbits) +
                    " vs " + std::to_string(b.nbits) + ")");
  }
  int inter = 0;
  int uni = 0;
  for (size_t w = 0; w < a.words.size(); ++w) {
    inter += std::popcount(a.words[w] & b.words[w]);
    uni += std::popcount(a.words[w] | b.words[w]);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace chembridge::fp
