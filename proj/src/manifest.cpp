// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "chembridge/errors.hpp"
#include "chembridge/hash.hpp"

namespace chembridge::manifest {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = std::move(ss).str();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_manifest(const std::filesystem::path& output_path, const std::string& subcommand,
                    const std::map<std::string, std::string>& flags, uint64_t seed,
                    const std::map<std::string, std::filesystem::path>& inputs) {
  nlohmann::json j;
  j["tool"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["timestamp"] = utc_now();
  j["flags"] = nlohmann::json::object();
  for (const auto& [k, v] : flags) j["flags"][k] = v;
  j["inputs"] = nlohmann::json::object();
  for (const auto& [name, path] : inputs)
    j["inputs"][name] = {{"path", path.string()}, {"fnv1a64", file_hash(path)}};
  j["output"] = output_path.string();

  const std::filesystem::path mpath = output_path.string() + ".manifest.json";
  std::ofstream out(mpath, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + mpath.string() + " for writing");
  const std::string s = j.dump(2) + "\n";
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw IoError("write failed for " + mpath.string());
}

}  // namespace chembridge::manifest
