// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace chembridge::manifest {

inline constexpr const char* kToolVersion = "chembridge 0.1.0";

// FNV-1a 64 over the raw bytes of a file, as 16 hex chars.
std::string file_hash(const std::filesystem::path& path);

// Every pipeline stage drops a <output>.manifest.json next to its output:
// subcommand, resolved flags, seed, input-file hashes, tool version and a
// UTC timestamp. Identical manifests (timestamp aside) imply identical
// outputs.
void write_manifest(const std::filesystem::path& output_path, const std::string& subcommand,
                    const std::map<std::string, std::string>& flags, uint64_t seed,
                    const std::map<std::string, std::filesystem::path>& inputs);

}  // namespace chembridge::manifest
