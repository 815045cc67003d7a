// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Hashing, RNG and CSV plumbing.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "chembridge/csv.hpp"
#include "chembridge/errors.hpp"
#include "chembridge/hash.hpp"
#include "chembridge/rng.hpp"

using namespace chembridge;

TEST_CASE("fnv1a matches the published test vectors") {
  CHECK(fnv1a32("") == 0x811c9dc5u);
  CHECK(fnv1a32("a") == 0xe40c292cu);
  CHECK(fnv1a32("foobar") == 0xbf9cf968u);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("ByteHasher encodes fields little-endian") {
  ByteHasher h;
  h.add_u32(0x01020304u);
  CHECK(h.hash32() == fnv1a32(std::string_view("\x04\x03\x02\x01", 4)));

  ByteHasher h64;
  h64.add_u64(0x0102030405060708ull);
  CHECK(h64.hash64() == 0x0c6d4496e17859d5ull);  // frozen from an independent reimplementation

  ByteHasher neg;
  neg.add_i32(-1);
  CHECK(neg.hash32() == fnv1a32(std::string_view("\xff\xff\xff\xff", 4)));
}

TEST_CASE("splitmix64 reference sequence") {
  uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafull);
  CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ull);
  CHECK(splitmix64(s) == 0x06c45d188009454full);
  s = 42;
  CHECK(splitmix64(s) == 0xbdd732262feb6e95ull);
}

TEST_CASE("xoshiro256** frozen sequence and seeding") {
  Xoshiro256 r0(0);
  CHECK(r0.next() == 0x99ec5f36cb75f2b4ull);
  CHECK(r0.next() == 0xbf6e1f784956452aull);
  CHECK(r0.next() == 0x1a5f849d4933e6e0ull);
  CHECK(r0.next() == 0x6aa594f1262d2d2cull);

  Xoshiro256 r42(42);
  CHECK(r42.next() == 0x15780b2e0c2ec716ull);

  Xoshiro256 a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("next_double is in [0,1) with frozen first draw") {
  Xoshiro256 r(42);
  CHECK(r.next_double() == doctest::Approx(0.08386297105988216).epsilon(1e-15));
  for (int i = 0; i < 1000; ++i) {
    double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("next_below stays in range and covers it") {
  Xoshiro256 r(1);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    uint64_t v = r.next_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("shuffle is a seeded permutation") {
  Xoshiro256 r(3);
  std::vector<int> v = shuffled_indices(50, r);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 50);
  CHECK(*s.begin() == 0);
  CHECK(*s.rbegin() == 49);

  Xoshiro256 r2(3);
  CHECK(shuffled_indices(50, r2) == v);
  Xoshiro256 r3(4);
  CHECK(shuffled_indices(50, r3) != v);
}

TEST_CASE("csv parses quoted fields, escapes and embedded newlines") {
  auto t = csv::parse("a,b,c\n1,\"x,y\",\"he said \"\"hi\"\"\"\n2,\"line1\nline2\",z\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[0][2] == "he said \"hi\"");
  CHECK(t.rows[1][1] == "line1\nline2");
  CHECK(t.column("b") == 1);
  CHECK(t.column("missing") == -1);
}

TEST_CASE("csv accepts CRLF and trailing newline-free input") {
  auto t = csv::parse("a,b\r\n1,2\r\n3,4");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][0] == "3");
  CHECK(t.rows[1][1] == "4");
}

TEST_CASE("csv rejects malformed input") {
  CHECK_THROWS_AS(csv::parse("a,b\n1\n"), SchemaError);           // ragged row
  CHECK_THROWS_AS(csv::parse("a,b\n1,2,3\n"), SchemaError);       // ragged row
  CHECK_THROWS_AS(csv::parse("a,b\n\"x,2\n"), SchemaError);       // unterminated quote
  CHECK_THROWS_AS(csv::parse("a,b\nx\"y,2\n"), SchemaError);      // stray quote
  CHECK_THROWS_AS(csv::parse(""), SchemaError);                   // no header
}

TEST_CASE("csv write/read round-trips awkward fields") {
  const std::vector<std::string> header = {"id", "text"};
  const std::vector<std::vector<std::string>> rows = {{"1", "plain"},
                                                      {"2", "comma, inside"},
                                                      {"3", "quote \" inside"},
                                                      {"4", "multi\nline"}};
  const auto path = std::filesystem::temp_directory_path() / "cb_csv_roundtrip.csv";
  csv::write_file(path, header, rows);
  auto back = csv::read_file(path);
  CHECK(back.header == header);
  CHECK(back.rows == rows);
  std::filesystem::remove(path);
}

TEST_CASE("escape_field quotes only when needed") {
  CHECK(csv::escape_field("plain") == "plain");
  CHECK(csv::escape_field("a,b") == "\"a,b\"");
  CHECK(csv::escape_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv::escape_field("two\nlines") == "\"two\nlines\"");
}
