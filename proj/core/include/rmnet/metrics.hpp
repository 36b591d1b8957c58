#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rmnet/feature_extractor.hpp"
#include "rmnet/image.hpp"

// Image-quality metrics. mae/psnr/ssim take images in the 8-bit range
// ([0, 255], not necessarily integral); callers de-normalise first.
namespace rmnet {

inline constexpr double kPsnrCapDb = 100.0;
inline constexpr double kFidEpsilon = 1e-6;

// Mean over all pixels and channels of |gt - pred|.
double mae(const Image& gt, const Image& pred);

struct PsnrResult {
  double db = 0.0;
  bool capped = false;  // zero error: db is kPsnrCapDb
};
// 10 log10(peak^2 / MSE), capped at kPsnrCapDb.
PsnrResult psnr(const Image& gt, const Image& pred, double peak = 255.0);

// PSNR and MAE restricted to hole pixels (mask == 0), all channels.
// Throws InvalidArgument when the mask has no holes.
PsnrResult hole_psnr(const Image& gt, const Image& pred, const BinaryMask& mask,
                     double peak = 255.0);
double hole_mae(const Image& gt, const Image& pred, const BinaryMask& mask);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// Luma Y = 0.299 R + 0.587 G + 0.114 B, in double.
std::vector<double> luminance(const Image& img);

// Mean local SSIM over every fully contained 11x11 Gaussian window
// (sigma 1.5) of the luminance images. Throws ShapeError below 11x11.
double ssim(const Image& gt, const Image& pred, double peak = 255.0);

// Row-major count x dim sample matrix.
struct Embeddings {
  int count = 0;
  int dim = 0;
  std::vector<double> values;

  double at(int i, int d) const { return values[static_cast<std::size_t>(i) * dim + d]; }
};

struct FidResult {
  double distance = 0.0;
  bool regularized = false;  // kFidEpsilon * I was added to both covariances
};

// Frechet distance between Gaussian fits (sample mean, unbiased covariance)
// of two embedding sets: |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
// Needs at least two samples per set.
FidResult frechet_distance(const Embeddings& a, const Embeddings& b);

enum class EmbedderSource { seeded_small, checkpoint };

struct EmbeddingExtractorSpec {
  EmbedderSource source = EmbedderSource::seeded_small;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint;  // conv stack in the feature-extractor checkpoint format
  std::vector<int> topology{32, FeatureExtractorSpec::kPool, 64, FeatureExtractorSpec::kPool, 128};

  void validate() const;
};

// Fixed conv stack followed by global average pooling.
class Embedder {
 public:
  explicit Embedder(EmbeddingExtractorSpec spec);

  int dim() const { return features_.output_channels(); }
  std::string identity() const { return features_.identity(); }
  // Accepts images in either range.
  Embeddings embed(std::span<const Image> images) const;

 private:
  EmbeddingExtractorSpec spec_;
  FeatureExtractor features_;
};

FidResult fid(std::span<const Image> real, std::span<const Image> fake, const Embedder& embedder);

}  // namespace rmnet
