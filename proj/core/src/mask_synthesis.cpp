#include "rmnet/mask_synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "rmnet/errors.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/png_io.hpp"
#include "rmnet/resize.hpp"
#include "rmnet/rng.hpp"

namespace rmnet {
namespace {

struct Point {
  double x;
  double y;
};

// Marks every pixel centre within `radius` of segment ab as a hole.
void stamp_segment(BinaryMask& mask, Point a, Point b, double radius) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
  const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double t = len2 > 0.0 ? ((x - a.x) * dx + (y - a.y) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = a.x + t * dx - x;
      const double ey = a.y + t * dy - y;
      if (ex * ex + ey * ey <= r2) mask.set(y, x, false);
    }
  }
}

}  // namespace

void StrokeSpec::validate() const {
  if (height < 8 || width < 8) {
    throw InvalidArgument("stroke canvas must be at least 8x8, got " + std::to_string(height) +
                          "x" + std::to_string(width));
  }
  if (num_strokes < 0) throw InvalidArgument("num_strokes must be non-negative");
  if (min_vertices < 1 || max_vertices < min_vertices) {
    throw InvalidArgument("vertex range must satisfy 1 <= min <= max");
  }
  if (min_thickness < 1 || max_thickness < min_thickness) {
    throw InvalidArgument("thickness range must satisfy 1 <= min <= max");
  }
  if (!(min_segment > 0.0) || max_segment < min_segment || !(max_turn >= 0.0)) {
    throw InvalidArgument("invalid stroke segment/turn parameters");
  }
}

BinaryMask synthesize_stroke_mask(const StrokeSpec& spec, std::uint64_t seed) {
  spec.validate();
  BinaryMask mask(spec.height, spec.width, 1);
  Rng rng(seed);
  const double side = std::max(spec.height, spec.width);
  for (int s = 0; s < spec.num_strokes; ++s) {
    const int vertices = static_cast<int>(rng.uniform_int(spec.min_vertices, spec.max_vertices));
    const int thickness = static_cast<int>(rng.uniform_int(spec.min_thickness, spec.max_thickness));
    const double radius = 0.5 * thickness;
    Point p{rng.uniform(0.0, spec.width - 1.0), rng.uniform(0.0, spec.height - 1.0)};
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    if (vertices == 1) stamp_segment(mask, p, p, radius);
    for (int v = 1; v < vertices; ++v) {
      heading += rng.uniform(-spec.max_turn, spec.max_turn);
      const double length = side * rng.uniform(spec.min_segment, spec.max_segment);
      Point q{std::clamp(p.x + length * std::cos(heading), 0.0, spec.width - 1.0),
              std::clamp(p.y + length * std::sin(heading), 0.0, spec.height - 1.0)};
      stamp_segment(mask, p, q, radius);
      p = q;
    }
  }
  return mask;
}

void MaskSourceConfig::validate() const {
  if (target_height <= 0 || target_width <= 0) {
    throw InvalidArgument("mask target size must be positive");
  }
  if (binarize_threshold < 0 || binarize_threshold > 255) {
    throw InvalidArgument("binarize threshold must lie in [0, 255]");
  }
  if (mode == MaskSourceMode::synthesize) {
    if (min_strokes < 0 || max_strokes < min_strokes) {
      throw InvalidArgument("stroke count range must satisfy 0 <= min <= max");
    }
    StrokeSpec s = strokes;
    s.height = target_height;
    s.width = target_width;
    s.validate();
  } else if (directory.empty()) {
    throw InvalidArgument("load_directory mask source needs a directory");
  }
}

BinaryMask binarize_and_resize(const GrayImage& raw, const MaskSourceConfig& cfg) {
  if (raw.height <= 0 || raw.width <= 0 ||
      raw.values.size() != static_cast<std::size_t>(raw.height) * raw.width) {
    throw ShapeError("binarize_and_resize: malformed grayscale input");
  }
  if (cfg.target_height <= 0 || cfg.target_width <= 0 || cfg.binarize_threshold < 0 ||
      cfg.binarize_threshold > 255) {
    throw InvalidArgument("binarize_and_resize: invalid target size or threshold");
  }
  std::vector<double> plane(raw.values.begin(), raw.values.end());
  const auto resized =
      area_resize_plane(plane, raw.height, raw.width, cfg.target_height, cfg.target_width);
  std::vector<std::uint8_t> values(resized.size());
  for (std::size_t i = 0; i < resized.size(); ++i) {
    const bool bright = resized[i] > cfg.binarize_threshold;
    // Strokes are the dark class; with strokes_are_holes the bright background stays visible.
    values[i] = (bright == cfg.strokes_are_holes) ? 1 : 0;
  }
  return BinaryMask::from_values(cfg.target_height, cfg.target_width, std::move(values));
}

BinaryMask load_mask_file(const std::filesystem::path& path, const MaskSourceConfig& cfg,
                          bool* was_color) {
  return binarize_and_resize(read_png_gray(path, was_color), cfg);
}

std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

MaskSource::MaskSource(MaskSourceConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.mode == MaskSourceMode::load_directory) {
    files_ = list_png_files(cfg_.directory);
    if (files_.empty()) throw IoError("no PNG masks in " + cfg_.directory.string());
  }
}

BinaryMask MaskSource::draw(std::uint64_t draw_seed) const {
  Rng rng(derive_seed(cfg_.seed, draw_seed));
  if (cfg_.mode == MaskSourceMode::load_directory) {
    const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(files_.size()) - 1);
    return load_mask_file(files_[static_cast<std::size_t>(pick)], cfg_);
  }
  StrokeSpec spec = cfg_.strokes;
  spec.height = cfg_.target_height;
  spec.width = cfg_.target_width;
  spec.num_strokes = static_cast<int>(rng.uniform_int(cfg_.min_strokes, cfg_.max_strokes));
  return synthesize_stroke_mask(spec, rng.next_u64());
}

BinaryMask sample_mask_in_bucket(const MaskSource& source, const HoleRatioBucket& bucket,
                                 int max_tries, std::uint64_t draw_seed) {
  bucket.validate();
  if (max_tries < 1) throw InvalidArgument("max_tries must be at least 1");
  for (int t = 0; t < max_tries; ++t) {
    BinaryMask m = source.draw(derive_seed(draw_seed, static_cast<std::uint64_t>(t)));
    if (bucket.contains(hole_ratio(m))) return m;
  }
  throw BucketUnsatisfiableError("no mask with hole ratio in [" + std::to_string(bucket.lo) +
                                 ", " + std::to_string(bucket.hi) + "] after " +
                                 std::to_string(max_tries) + " draws");
}

}  // namespace rmnet
