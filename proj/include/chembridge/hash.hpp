// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace chembridge {

// FNV-1a, the one fixed hash used for fingerprints, feature hashing
// and scaffold keys. Inputs are always little-endian byte encodings
// so results are identical across platforms.

inline constexpr uint32_t kFnv32Offset = 2166136261u;
inline constexpr uint32_t kFnv32Prime = 16777619u;
inline constexpr uint64_t kFnv64Offset = 14695981039346656037ull;
inline constexpr uint64_t kFnv64Prime = 1099511628211ull;

inline uint32_t fnv1a32(const uint8_t* data, size_t n, uint32_t h = kFnv32Offset) {
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= kFnv32Prime;
  }
  return h;
}

inline uint64_t fnv1a64(const uint8_t* data, size_t n, uint64_t h = kFnv64Offset) {
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= kFnv64Prime;
  }
  return h;
}

inline uint32_t fnv1a32(std::string_view s) {
  return fnv1a32(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

inline uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

// Accumulates fixed-width little-endian fields, then hashes them.
class ByteHasher {
 public:
  void add_u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void add_i32(int32_t v) { add_u32(static_cast<uint32_t>(v)); }
  void add_u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  uint32_t hash32() const { return fnv1a32(bytes_.data(), bytes_.size()); }
  uint64_t hash64() const { return fnv1a64(bytes_.data(), bytes_.size()); }

 private:
  std::vector<uint8_t> bytes_;
};

}  // namespace chembridge
