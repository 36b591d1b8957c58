#include "rmnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "rmnet/errors.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/png_io.hpp"
#include "rmnet/resize.hpp"
#include "rmnet/rng.hpp"

namespace rmnet {
namespace fs = std::filesystem;

namespace {

bool has_png_signature(const fs::path& p) {
  static constexpr unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::ifstream in(p, std::ios::binary);
  unsigned char buf[8] = {};
  if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
  return std::equal(std::begin(buf), std::end(buf), std::begin(kSig));
}

}  // namespace

std::vector<fs::path> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::vector<fs::path> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

DatasetSplit load_split(const fs::path& root, const SplitSpec& spec, int image_size) {
  if (!fs::is_directory(root)) throw InvalidArgument("dataset root is not a directory: " + root.string());
  if (image_size < 1) throw InvalidArgument("image_size must be positive");
  DatasetSplit split;
  split.root = root;
  split.image_size = image_size;

  if (spec.train_manifest || spec.test_manifest) {
    if (!spec.train_manifest || !spec.test_manifest) {
      throw InvalidArgument("manifest mode needs both train and test manifests");
    }
    split.train = read_manifest(*spec.train_manifest);
    split.test = read_manifest(*spec.test_manifest);
    const std::set<fs::path> train_set(split.train.begin(), split.train.end());
    for (const auto& t : split.test) {
      if (train_set.count(t)) throw InvalidArgument("file in both manifests: " + t.string());
    }
    for (const auto* list : {&split.train, &split.test}) {
      for (const auto& f : *list) {
        if (!fs::is_regular_file(root / f)) throw IoError("manifest entry missing: " + f.string());
      }
    }
    if (split.train.empty() && split.test.empty()) throw InvalidArgument("manifests are empty");
    return split;
  }

  if (!(spec.train_fraction >= 0.0 && spec.train_fraction <= 1.0)) {
    throw InvalidArgument("train_fraction must lie in [0, 1]");
  }
  std::vector<fs::path> files;
  for (const auto& p : list_png_files(root)) {
    if (has_png_signature(p)) {
      files.push_back(p.filename());
    } else {
      ++split.skipped;
    }
  }
  if (files.empty()) throw InvalidArgument("no readable PNG images in " + root.string());
  Rng rng(spec.seed);
  for (std::size_t i = files.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(files[i - 1], files[j]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(files.size())));
  split.train.assign(files.begin(), files.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(files.begin() + static_cast<std::ptrdiff_t>(n_train), files.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void write_split_manifests(const fs::path& dir, const DatasetSplit& split) {
  fs::create_directories(dir);
  auto write = [&](const fs::path& p, const std::vector<fs::path>& list) {
    std::string text;
    for (const auto& f : list) text += f.generic_string() + "\n";
    write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  };
  write(dir / "train.txt", split.train);
  write(dir / "test.txt", split.test);
}

Image preprocess(const fs::path& file, int height, int width) {
  const Image raw = read_png_rgb(file);
  const Image sized =
      raw.height() == height && raw.width() == width ? raw : area_resize(raw, height, width);
  return to_model_range(sized);
}

std::vector<Image> load_images(const fs::path& root, const std::vector<fs::path>& files,
                               int image_size, int* skipped) {
  std::vector<Image> out;
  out.reserve(files.size());
  int bad = 0;
  for (const auto& f : files) {
    try {
      out.push_back(preprocess(root / f, image_size, image_size));
    } catch (const IoError&) {
      ++bad;
    }
  }
  if (skipped) *skipped = bad;
  return out;
}

}  // namespace rmnet
