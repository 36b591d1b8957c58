#include "rmnet/param_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rmnet/errors.hpp"
#include "rmnet/hashing.hpp"
#include "rmnet/png_io.hpp"

namespace rmnet {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in host order and must be little-endian");

using json = nlohmann::json;

std::string blob_file_name(const std::string& group, const std::string& name) {
  std::string file = group + "__" + name + ".bin";
  for (char& ch : file) {
    if (ch == '/' || ch == '\\') ch = '_';
  }
  return file;
}

std::string manifest_hash(json manifest) {
  manifest.erase("manifest_sha256");
  return sha256_hex(manifest.dump());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptCheckpointError("missing checkpoint file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_checkpoint_dir(const std::filesystem::path& dir, const json& meta,
                         const std::vector<TensorGroup>& groups) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());

  json tensors = json::array();
  for (const auto& group : groups) {
    for (const auto& p : *group.params) {
      const std::string file = blob_file_name(group.name, p.name);
      const auto bytes = std::as_bytes(std::span(p.values));
      write_file_bytes(dir / file,
                       std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
      tensors.push_back({{"group", group.name},
                         {"name", p.name},
                         {"shape", p.shape},
                         {"file", file},
                         {"sha256", sha256_hex(bytes)}});
    }
  }
  json manifest = {{"format", kCheckpointFormat}, {"meta", meta}, {"tensors", tensors}};
  manifest["manifest_sha256"] = manifest_hash(manifest);
  const std::string text = manifest.dump(2) + "\n";
  write_file_bytes(dir / kManifestName,
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

LoadedCheckpoint load_checkpoint_dir(const std::filesystem::path& dir) {
  const std::string text = read_file(dir / kManifestName);
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("unparseable manifest in " + dir.string() + ": " + e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != kCheckpointFormat) {
      throw CorruptCheckpointError("unknown checkpoint format in " + dir.string());
    }
    if (manifest.at("manifest_sha256").get<std::string>() != manifest_hash(manifest)) {
      throw CorruptCheckpointError("manifest hash mismatch in " + dir.string());
    }
    LoadedCheckpoint out;
    out.meta = manifest.at("meta");
    for (const auto& entry : manifest.at("tensors")) {
      const auto group = entry.at("group").get<std::string>();
      const auto name = entry.at("name").get<std::string>();
      auto& set = out.groups[group];
      const std::size_t idx = set.add(name, entry.at("shape").get<std::vector<int>>());
      auto& values = set[idx].values;
      const std::string blob = read_file(dir / entry.at("file").get<std::string>());
      if (blob.size() != values.size() * sizeof(float)) {
        throw CorruptCheckpointError("tensor " + group + "/" + name + " has " +
                                     std::to_string(blob.size()) + " bytes, expected " +
                                     std::to_string(values.size() * sizeof(float)));
      }
      if (sha256_hex(std::string_view(blob)) != entry.at("sha256").get<std::string>()) {
        throw CorruptCheckpointError("tensor " + group + "/" + name + " fails its hash check");
      }
      if (!values.empty()) std::memcpy(values.data(), blob.data(), blob.size());
    }
    return out;
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("malformed manifest in " + dir.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw CorruptCheckpointError("malformed tensor table in " + dir.string() + ": " + e.what());
  }
}

}  // namespace rmnet
