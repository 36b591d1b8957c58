#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmnet/parameters.hpp"

// Checkpoint directory layout:
//
//   manifest.json        metadata, tensor table, and the manifest's own hash
//   <group>__<name>.bin  one little-endian float32 row-major blob per tensor
//
// Each tensor entry records group, name, shape, file, and the blob's SHA-256.
// "manifest_sha256" hashes the manifest dumped without that field, so any edit
// to the metadata or the tensor table is detected on load.
namespace rmnet {

inline constexpr const char* kCheckpointFormat = "rmnet-checkpoint/1";
inline constexpr const char* kManifestName = "manifest.json";

struct TensorGroup {
  std::string name;
  const ParameterSet* params;
};

struct LoadedCheckpoint {
  nlohmann::json meta;
  std::map<std::string, ParameterSet> groups;
};

// Creates `dir` if needed and writes the manifest plus blobs. Throws
// DiskFullError when the device fills up, IoError for other failures.
void save_checkpoint_dir(const std::filesystem::path& dir, const nlohmann::json& meta,
                         const std::vector<TensorGroup>& groups);

// Verifies the manifest hash, blob sizes, and blob hashes. Throws
// CorruptCheckpointError on any mismatch or truncation.
LoadedCheckpoint load_checkpoint_dir(const std::filesystem::path& dir);

}  // namespace rmnet
