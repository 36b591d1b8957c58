#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rmnet/image.hpp"

namespace rmnet {

// Random-walk stroke model standing in for hand-drawn irregular masks.
struct StrokeSpec {
  int num_strokes = 4;
  int min_vertices = 4;
  int max_vertices = 12;
  int min_thickness = 5;  // pixels
  int max_thickness = 15;
  int height = 256;
  int width = 256;
  double max_turn = 1.0471975511965976;  // radians per vertex (pi / 3)
  double min_segment = 0.05;             // fraction of the longer canvas side
  double max_segment = 0.25;

  void validate() const;
};

// Rasterises `num_strokes` thick polylines as holes (0) on an all-visible
// canvas. Same (spec, seed) always gives the same mask.
BinaryMask synthesize_stroke_mask(const StrokeSpec& spec, std::uint64_t seed);

enum class MaskSourceMode { synthesize, load_directory };

struct MaskSourceConfig {
  MaskSourceMode mode = MaskSourceMode::synthesize;
  std::filesystem::path directory;  // load_directory mode
  int target_height = 256;
  int target_width = 256;
  int binarize_threshold = 127;  // values strictly above are the bright class
  // Dark strokes on a bright background mark holes; false inverts that.
  bool strokes_are_holes = true;
  std::uint64_t seed = 0;
  // Synthesize mode: stroke shape, plus a per-draw stroke count in
  // [min_strokes, max_strokes] (StrokeSpec::num_strokes is ignored here).
  StrokeSpec strokes;
  int min_strokes = 1;
  int max_strokes = 12;

  void validate() const;
};

// Area-resizes to the target size, thresholds (value > threshold is bright),
// and applies polarity so the result uses 1 = visible.
BinaryMask binarize_and_resize(const GrayImage& raw, const MaskSourceConfig& cfg);

// Reads and binarises one mask file. A colour file is converted by luminance
// and flagged via `was_color`.
BinaryMask load_mask_file(const std::filesystem::path& path, const MaskSourceConfig& cfg,
                          bool* was_color = nullptr);

// Lists *.png files in `dir`, sorted lexicographically.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

// Deterministic mask supply: synthesised strokes or masks picked from a directory.
class MaskSource {
 public:
  explicit MaskSource(MaskSourceConfig cfg);

  // Pure function of (config, draw_seed).
  BinaryMask draw(std::uint64_t draw_seed) const;

  const MaskSourceConfig& config() const { return cfg_; }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  MaskSourceConfig cfg_;
  std::vector<std::filesystem::path> files_;
};

// Rejection-samples draws until lo <= hole_ratio <= hi. Throws
// BucketUnsatisfiableError after `max_tries` misses.
BinaryMask sample_mask_in_bucket(const MaskSource& source, const HoleRatioBucket& bucket,
                                 int max_tries, std::uint64_t draw_seed);

}  // namespace rmnet
