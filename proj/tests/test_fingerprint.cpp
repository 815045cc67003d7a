// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <vector>

#include "chembridge/errors.hpp"
#include "chembridge/fingerprint.hpp"
#include "chembridge/smiles.hpp"
#include "smiles_writer.hpp"

using namespace chembridge;
using namespace chembridge::smiles;
namespace fp = chembridge::fp;

TEST_CASE("atom invariants: frozen values from the documented encoding") {
  // Independently recomputed: FNV-1a32 over little-endian u32 fields
  // (element, degree, totalH, charge, in_ring, aromatic).
  auto methane = parse_smiles("C");
  CHECK(fp::atom_invariant(methane, 0) == 0x5aa24ae7u);

  auto propane = parse_smiles("CCC");
  CHECK(fp::atom_invariant(propane, 0) == 0xa28b1a51u);  // CH3
  CHECK(fp::atom_invariant(propane, 1) == 0x8d4ffbc3u);  // CH2
  CHECK(fp::atom_invariant(propane, 0) == fp::atom_invariant(propane, 2));
  CHECK(fp::atom_invariant(propane, 0) != fp::atom_invariant(propane, 1));

  auto benzene = parse_smiles("c1ccccc1");
  CHECK(fp::atom_invariant(benzene, 0) == 0xfd729510u);
}

TEST_CASE("methane keeps exactly one environment across radii") {
  auto g = parse_smiles("C");
  auto ids = fp::ecfp_identifiers(g, 2);
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == std::vector<uint32_t>{0x5aa24ae7u});
  CHECK(ids[1].empty());  // same atom set as radius 0 -> deduplicated
  CHECK(ids[2].empty());
  CHECK(fp::ecfp(g, 2, 2048).popcount() == 1);
}

TEST_CASE("benzene: one identifier per radius, popcount 3") {
  // Oracle walk: all six aromatic carbons share the invariant 0xfd729510;
  // every Morgan update hashes (r, own, [(4, nb), (4, nb)]), so each radius
  // produces a single new identifier. Frozen from the same recomputation:
  auto g = parse_smiles("c1ccccc1");
  auto ids = fp::ecfp_identifiers(g, 2);
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == std::vector<uint32_t>{0xfd729510u});
  CHECK(ids[1] == std::vector<uint32_t>{0x6b0041dau});
  CHECK(ids[2] == std::vector<uint32_t>{0xe18e07c7u});

  auto f = fp::ecfp(g, 2, 2048);
  CHECK(f.popcount() == 3);
  CHECK(f.test(1296));  // 0xfd729510 mod 2048
  CHECK(f.test(474));   // 0x6b0041da mod 2048
  CHECK(f.test(1991));  // 0xe18e07c7 mod 2048
}

TEST_CASE("atom-order invariance for the written examples") {
  CHECK(fp::ecfp(parse_smiles("CCO"), 2, 2048) == fp::ecfp(parse_smiles("OCC"), 2, 2048));
  CHECK(fp::ecfp(parse_smiles("c1ccccc1"), 2, 2048) ==
        fp::ecfp(parse_smiles("c1ccccc1"), 2, 2048));
}

TEST_CASE("rewriting invariance on a small corpus") {
  const char* molecules[] = {
      "CC(=O)Oc1ccccc1C(=O)O",
      "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
      "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
      "CC(=O)Nc1ccc(O)cc1",
      "c1ccc2ccccc2c1",
      "OC(=O)C1CCCCC1",
      "CCOC(=O)c1ccccc1N",
  };
  Xoshiro256 rng(11);
  for (const char* s : molecules) {
    auto g = parse_smiles(s);
    const auto reference = fp::ecfp(g, 2, 2048);
    for (int rep = 0; rep < 5; ++rep) {
      auto g2 = parse_smiles(testutil::write_smiles(g, rng), SaltPolicy::KeepAll);
      CAPTURE(s);
      CHECK(fp::ecfp(g2, 2, 2048) == reference);
    }
  }
}

TEST_CASE("identifier lists are prefix-stable in the radius") {
  const char* molecules[] = {"CCO", "CC(=O)Oc1ccccc1C(=O)O", "c1ccc2ccccc2c1"};
  for (const char* s : molecules) {
    auto g = parse_smiles(s);
    auto r2 = fp::ecfp_identifiers(g, 2);
    auto r4 = fp::ecfp_identifiers(g, 4);
    REQUIRE(r4.size() == 5);
    for (size_t r = 0; r < r2.size(); ++r) CHECK(r4[r] == r2[r]);
  }
}

TEST_CASE("alkane chains: new environments until the radius-2 set saturates") {
  // A radius-2 environment sees a 5-atom window of the chain, so chains of
  // 7+ carbons all contain the same set of window patterns: the bit set
  // stops changing there (the fingerprint is a set, not a multiset).
  std::string chain = "C";
  auto prev = fp::ecfp(parse_smiles(chain), 2, 2048);
  for (int len = 2; len <= 12; ++len) {
    chain += "C";
    auto cur = fp::ecfp(parse_smiles(chain), 2, 2048);
    if (len <= 7) {
      CHECK(!(cur == prev));
    } else {
      CHECK(cur == prev);
    }
    prev = cur;
  }
  // A branch breaks the saturation: isomers with new local shapes differ.
  auto straight = fp::ecfp(parse_smiles("CCCCCCCC"), 2, 2048);
  auto branched = fp::ecfp(parse_smiles("CC(C)CCCCC"), 2, 2048);
  CHECK(!(straight == branched));
}

TEST_CASE("tanimoto") {
  auto make = [](std::initializer_list<uint32_t> bits) {
    fp::Fingerprint f;
    f.words.assign(2048 / 64, 0);
    for (uint32_t b : bits) f.set(b);
    return f;
  };
  auto a = make({1, 2, 3, 4});
  CHECK(fp::tanimoto(a, a) == doctest::Approx(1.0));
  CHECK(fp::tanimoto(make({1, 2}), make({3, 4})) == doctest::Approx(0.0));
  CHECK(fp::tanimoto(make({1, 2, 3, 4}), make({3, 4, 5})) == doctest::Approx(0.4));
  CHECK(fp::tanimoto(make({}), make({})) == doctest::Approx(1.0));

  fp::Fingerprint narrow;
  narrow.words.assign(1, 0);
  narrow.nbits = 64;
  CHECK_THROWS_AS(fp::tanimoto(a, narrow), DataError);
}

TEST_CASE("ecfp argument validation") {
  smiles::MoleculeGraph empty;
  CHECK_THROWS_AS(fp::ecfp(empty, 2, 2048), DataError);
  auto g = parse_smiles("CC");
  CHECK_THROWS_AS(fp::ecfp(g, -1, 2048), DataError);
  CHECK_THROWS_AS(fp::ecfp(g, 2, 100), DataError);   // not a power of two
  CHECK_THROWS_AS(fp::ecfp(g, 2, 32), DataError);    // below 64
  CHECK_NOTHROW(fp::ecfp(g, 0, 64));
}

TEST_CASE("salt stripping keeps fingerprints on the parent molecule") {
  auto parent = fp::ecfp(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), 2, 2048);
  auto salted = fp::ecfp(parse_smiles("CC(=O)Oc1ccccc1C(=O)O.[Na+]"), 2, 2048);
  CHECK(parent == salted);
}
