#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmnet/image.hpp"

namespace rmnet {

// Train/test file lists, relative to `root`, each in lexicographic order.
struct DatasetSplit {
  std::filesystem::path root;
  std::vector<std::filesystem::path> train;
  std::vector<std::filesystem::path> test;
  int image_size = 256;
  int skipped = 0;  // files ignored because they are not readable PNGs
};

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  // Manifest mode: newline-separated paths relative to the root. When set,
  // both must be given and the split is taken from them verbatim.
  std::optional<std::filesystem::path> train_manifest;
  std::optional<std::filesystem::path> test_manifest;
};

// Fraction mode shuffles the sorted *.png listing with `seed` and takes
// round(fraction * n) files for training. Throws InvalidArgument for an empty
// directory or overlapping manifests, IoError for unreadable manifests.
DatasetSplit load_split(const std::filesystem::path& root, const SplitSpec& spec, int image_size);

// Writes train.txt and test.txt into `dir`.
void write_split_manifests(const std::filesystem::path& dir, const DatasetSplit& split);
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path);

// Decodes, area-resizes to height x width, and maps to [-1, 1] via x / 127.5 - 1.
Image preprocess(const std::filesystem::path& file, int height, int width);

// Preprocesses every file of `files` (relative to `root`); decode failures
// are skipped and counted in `skipped`.
std::vector<Image> load_images(const std::filesystem::path& root,
                               const std::vector<std::filesystem::path>& files, int image_size,
                               int* skipped = nullptr);

}  // namespace rmnet
