#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kolmo::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ArtifactHash {
  std::string path;
  std::string sha256;
};

/// Files are hashed directly; directories contribute every regular file below
/// them in sorted order, manifests excluded.
std::vector<ArtifactHash> hash_artifacts(const std::vector<std::string>& paths);

struct Manifest {
  std::string stage;
  std::string version;
  std::uint64_t seed = 0;
  std::string config;  // section text
  std::vector<ArtifactHash> inputs;
  std::vector<ArtifactHash> outputs;
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// <file>.manifest.json beside a file artifact, <dir>/<stage>.manifest.json
/// inside a directory artifact (several stages may share one model directory).
std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output, const std::string& stage);

}  // namespace kolmo::cli
