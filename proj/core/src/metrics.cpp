#include "rmnet/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rmnet/errors.hpp"

namespace rmnet {
namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError(std::string(what) + ": image dimensions differ");
  }
}

void require_8bit(const Image& a, const Image& b, const char* what) {
  require_same_dims(a, b, what);
  if (a.range() != ValueRange::unit_8bit || b.range() != ValueRange::unit_8bit) {
    throw ValueRangeError(std::string(what) + ": expects 8-bit range images");
  }
}

PsnrResult psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return {kPsnrCapDb, true};
  const double db = 10.0 * std::log10(peak * peak / mse);
  if (db >= kPsnrCapDb) return {kPsnrCapDb, true};
  return {db, false};
}

std::vector<double> gaussian_taps() {
  std::vector<double> taps(kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Valid-mode separable Gaussian filter of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int oh = h - k + 1;
  const int ow = w - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * src[static_cast<std::size_t>(y) * w + x + t];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

using Mat = Eigen::MatrixXd;

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

void mean_and_cov(const Embeddings& e, Eigen::VectorXd& mu, Mat& cov) {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      e.values.data(), e.count, e.dim);
  mu = x.colwise().mean().transpose();
  const Mat centered = x.rowwise() - mu.transpose();
  cov = (centered.transpose() * centered) / static_cast<double>(e.count - 1);
  cov = 0.5 * (cov + cov.transpose());
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

double mae(const Image& gt, const Image& pred) {
  require_8bit(gt, pred, "mae");
  auto a = gt.values();
  auto b = pred.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(static_cast<double>(a[i]) - b[i]);
  return sum / static_cast<double>(a.size());
}

PsnrResult psnr(const Image& gt, const Image& pred, double peak) {
  require_8bit(gt, pred, "psnr");
  if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be positive");
  auto a = gt.values();
  auto b = pred.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += d * d;
  }
  return psnr_from_mse(sum / static_cast<double>(a.size()), peak);
}

namespace {

template <typename F>
std::size_t for_each_hole_value(const Image& gt, const Image& pred, const BinaryMask& mask,
                                const char* what, F&& f) {
  require_8bit(gt, pred, what);
  if (mask.height() != gt.height() || mask.width() != gt.width()) {
    throw ShapeError(std::string(what) + ": mask dimensions differ from image");
  }
  std::size_t n = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < gt.height(); ++y) {
      for (int x = 0; x < gt.width(); ++x) {
        if (mask.at(y, x) != 0) continue;
        f(static_cast<double>(gt.at(c, y, x)) - pred.at(c, y, x));
        ++n;
      }
    }
  }
  if (n == 0) throw InvalidArgument(std::string(what) + ": mask has no holes");
  return n;
}

}  // namespace

PsnrResult hole_psnr(const Image& gt, const Image& pred, const BinaryMask& mask, double peak) {
  double sum = 0.0;
  const auto n = for_each_hole_value(gt, pred, mask, "hole_psnr", [&](double d) { sum += d * d; });
  return psnr_from_mse(sum / static_cast<double>(n), peak);
}

double hole_mae(const Image& gt, const Image& pred, const BinaryMask& mask) {
  double sum = 0.0;
  const auto n =
      for_each_hole_value(gt, pred, mask, "hole_mae", [&](double d) { sum += std::abs(d); });
  return sum / static_cast<double>(n);
}

std::vector<double> luminance(const Image& img) {
  const std::size_t n = static_cast<std::size_t>(img.height()) * img.width();
  std::vector<double> y(n);
  const float* r = img.plane(0);
  const float* g = img.plane(1);
  const float* b = img.plane(2);
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  return y;
}

double ssim(const Image& gt, const Image& pred, double peak) {
  require_8bit(gt, pred, "ssim");
  const int h = gt.height();
  const int w = gt.width();
  if (h < kSsimWindow || w < kSsimWindow) throw ShapeError("ssim: image smaller than 11x11 window");
  const auto x = luminance(gt);
  const auto y = luminance(pred);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto taps = gaussian_taps();
  const auto mx = filter_valid(x, h, w, taps);
  const auto my = filter_valid(y, h, w, taps);
  const auto fxx = filter_valid(xx, h, w, taps);
  const auto fyy = filter_valid(yy, h, w, taps);
  const auto fxy = filter_valid(xy, h, w, taps);
  const double c1 = (kSsimK1 * peak) * (kSsimK1 * peak);
  const double c2 = (kSsimK2 * peak) * (kSsimK2 * peak);
  double sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = fxx[i] - mx[i] * mx[i];
    const double vy = fyy[i] - my[i] * my[i];
    const double cxy = fxy[i] - mx[i] * my[i];
    sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
           ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return sum / static_cast<double>(mx.size());
}

FidResult frechet_distance(const Embeddings& a, const Embeddings& b) {
  if (a.dim != b.dim || a.dim < 1) throw ShapeError("frechet_distance: embedding dims differ");
  if (a.count < 2 || b.count < 2) {
    throw InvalidArgument("frechet_distance: each set needs at least two samples");
  }
  Eigen::VectorXd mu_a, mu_b;
  Mat cov_a, cov_b;
  mean_and_cov(a, mu_a, cov_a);
  mean_and_cov(b, mu_b, cov_b);

  FidResult out;
  if (min_eigenvalue(cov_a) < kFidEpsilon || min_eigenvalue(cov_b) < kFidEpsilon) {
    const Mat eps = kFidEpsilon * Mat::Identity(a.dim, a.dim);
    cov_a += eps;
    cov_b += eps;
    out.regularized = true;
  }
  // Tr((S_a S_b)^{1/2}) = Tr((S_a^{1/2} S_b S_a^{1/2})^{1/2}); the inner
  // product is symmetric PSD so a symmetric eigensolver suffices.
  const Mat root_a = psd_sqrt(cov_a);
  Mat inner = root_a * cov_b * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr_cross;
  out.distance = std::max(d, 0.0);
  return out;
}

void EmbeddingExtractorSpec::validate() const {
  FeatureExtractorSpec fs;
  fs.topology = topology;
  fs.validate();
  if (source == EmbedderSource::checkpoint && checkpoint.empty()) {
    throw InvalidArgument("embedder: checkpoint source needs a path");
  }
}

namespace {

FeatureExtractorSpec embedder_features(const EmbeddingExtractorSpec& spec) {
  spec.validate();
  FeatureExtractorSpec fs;
  fs.topology = spec.topology;
  if (spec.source == EmbedderSource::checkpoint) {
    fs.source = WeightsSource::pretrained_checkpoint;
    fs.checkpoint = spec.checkpoint;
  } else {
    fs.source = WeightsSource::seeded_random;
    fs.seed = spec.seed;
  }
  return fs;
}

}  // namespace

Embedder::Embedder(EmbeddingExtractorSpec spec)
    : spec_(std::move(spec)), features_(embedder_features(spec_)) {}

Embeddings Embedder::embed(std::span<const Image> images) const {
  Embeddings out;
  out.count = static_cast<int>(images.size());
  out.dim = dim();
  out.values.reserve(static_cast<std::size_t>(out.count) * out.dim);
  constexpr std::size_t kChunk = 8;
  for (std::size_t first = 0; first < images.size(); first += kChunk) {
    const std::size_t last = std::min(first + kChunk, images.size());
    std::vector<Image> chunk;
    for (std::size_t i = first; i < last; ++i) chunk.push_back(to_model_range(images[i]));
    const Tensor f = features_.extract(images_to_tensor(chunk));
    const std::size_t plane = static_cast<std::size_t>(f.h()) * f.w();
    for (int n = 0; n < f.n(); ++n) {
      for (int c = 0; c < f.c(); ++c) {
        const float* p = f.plane(n, c);
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += p[i];
        out.values.push_back(s / static_cast<double>(plane));
      }
    }
  }
  return out;
}

FidResult fid(std::span<const Image> real, std::span<const Image> fake, const Embedder& embedder) {
  if (real.empty() || fake.empty()) throw InvalidArgument("fid: image sets must be nonempty");
  return frechet_distance(embedder.embed(real), embedder.embed(fake));
}

}  // namespace rmnet
