#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmnet/image.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/metrics.hpp"
#include "rmnet/model.hpp"

namespace rmnet {

// Aggregates for one bucket (or the overall row). Means are over samples;
// FID is NaN when fewer than two samples were scored.
struct BucketReport {
  std::string label;
  HoleRatioBucket bucket;
  int n = 0;
  double mae = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double fid = 0.0;
  int psnr_capped = 0;          // samples at the kPsnrCapDb sentinel
  bool fid_regularized = false;
};

struct SampleFailure {
  std::string bucket;
  std::size_t image_index = 0;
  std::string message;
};

struct MetricReport {
  std::vector<BucketReport> buckets;
  BucketReport overall;
  std::vector<SampleFailure> failures;
};

// Fills the holes of one model-range masked image. `index` is the test-set
// position of the image.
using Predictor =
    std::function<Image(const Image& masked, const BinaryMask& mask, std::size_t index)>;

Predictor generator_predictor(const Generator& generator, const ParameterSet& params);

struct EvalOptions {
  // Empty: one overall row over masks drawn from [0.01, 0.6].
  std::vector<HoleRatioBucket> buckets;
  int max_tries = 2000;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> grid_dir;  // masked | output | gt PNGs
  int grid_limit = 8;                              // per bucket
};

// For every bucket and test image: draw a mask in the bucket, predict,
// composite with the ground truth, and score the composite in the 8-bit
// range. Per-sample failures are collected rather than thrown.
MetricReport evaluate(const Predictor& predict, std::span<const Image> test_images,
                      const MaskSource& masks, const EvalOptions& options,
                      const Embedder& embedder);

// Rows of bucket,metric,value,n for every bucket then "overall".
void write_report_csv(const std::filesystem::path& path, const MetricReport& report);

// Side-by-side strip of equally sized images.
void write_grid_png(const std::filesystem::path& path, std::span<const Image> panels);

}  // namespace rmnet
