#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "rmnet/errors.hpp"
#include "rmnet/evaluate.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/metrics.hpp"
#include "synthetic.hpp"

using namespace rmnet;
using rmnet::testing::random_image;
using rmnet::testing::smooth_image;

namespace {

double oracle_mae(const Image& a, const Image& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x) s += std::fabs(double(a.at(c, y, x)) - b.at(c, y, x));
  return s / (3.0 * a.height() * a.width());
}

double oracle_psnr(const Image& a, const Image& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x) s += std::pow(double(a.at(c, y, x)) - b.at(c, y, x), 2);
  const double mse = s / (3.0 * a.height() * a.width());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Direct 2-D Gaussian window, no separability.
double oracle_ssim(const Image& a, const Image& b) {
  auto luma = [](const Image& im, int y, int x) {
    return 0.299 * im.at(0, y, x) + 0.587 * im.at(1, y, x) + 0.114 * im.at(2, y, x);
  };
  double w[11][11];
  double total = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      total += w[i][j];
    }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double sum = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + 11 <= a.height(); ++y0)
    for (int x0 = 0; x0 + 11 <= a.width(); ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double k = w[i][j] / total;
          const double u = luma(a, y0 + i, x0 + j), v = luma(b, y0 + i, x0 + j);
          ma += k * u;
          mb += k * v;
          saa += k * u * u;
          sbb += k * v * v;
          sab += k * u * v;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return sum / count;
}

Image filled(int h, int w, float v) { return Image(h, w, ValueRange::unit_8bit, v); }

TEST(Metrics, MatchBruteForceOracles) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Image a = random_image(16, 16, ValueRange::unit_8bit, rng);
    const Image b = random_image(16, 16, ValueRange::unit_8bit, rng);
    EXPECT_NEAR(mae(a, b), oracle_mae(a, b), 1e-9);
    EXPECT_NEAR(psnr(a, b).db, oracle_psnr(a, b), 1e-9);
    EXPECT_NEAR(ssim(a, b), oracle_ssim(a, b), 1e-9);
  }
  const Image s1 = smooth_image(24, 24, 1), s2 = smooth_image(24, 24, 2);
  EXPECT_NEAR(ssim(s1, s2), oracle_ssim(s1, s2), 1e-9);
}

TEST(Metrics, PsnrHandValues) {
  EXPECT_NEAR(psnr(filled(4, 4, 0), filled(4, 4, 2.55f)).db, 40.0, 1e-5);
  EXPECT_NEAR(psnr(filled(4, 4, 0), filled(4, 4, 255)).db, 0.0, 1e-12);
  const auto same = psnr(filled(4, 4, 9), filled(4, 4, 9));
  EXPECT_TRUE(same.capped);
  EXPECT_EQ(same.db, kPsnrCapDb);
  EXPECT_FALSE(psnr(filled(4, 4, 9), filled(4, 4, 10)).capped);
}

TEST(Metrics, MaeHandValue) {
  Image b = filled(2, 2, 10);
  b.at(1, 0, 0) = 22;
  EXPECT_DOUBLE_EQ(mae(filled(2, 2, 10), b), 1.0);
}

TEST(Metrics, RejectModelRange) {
  const Image m(16, 16, ValueRange::model);
  EXPECT_THROW(mae(m, m), ValueRangeError);
  EXPECT_THROW(psnr(m, m), ValueRangeError);
  EXPECT_THROW(ssim(m, m), ValueRangeError);
  EXPECT_THROW(ssim(filled(10, 16, 0), filled(10, 16, 0)), ShapeError);
  EXPECT_THROW(mae(filled(4, 4, 0), filled(4, 5, 0)), ShapeError);
}

TEST(Metrics, HoleRestrictedScores) {
  Image gt = filled(2, 2, 100), pred = filled(2, 2, 100);
  BinaryMask m(2, 2, 1);
  m.set(0, 1, false);
  for (int c = 0; c < 3; ++c) pred.at(c, 0, 1) = 110;
  pred.at(0, 1, 1) = 0;  // visible, ignored
  EXPECT_DOUBLE_EQ(hole_mae(gt, pred, m), 10.0);
  EXPECT_NEAR(hole_psnr(gt, pred, m).db, 10 * std::log10(255.0 * 255 / 100), 1e-12);
  EXPECT_THROW(hole_mae(gt, pred, BinaryMask(2, 2, 1)), InvalidArgument);
}

TEST(Ssim, IdentitySymmetryAndNegation) {
  Rng rng(2);
  const Image a = random_image(20, 20, ValueRange::unit_8bit, rng);
  const Image b = random_image(20, 20, ValueRange::unit_8bit, rng);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  Image neg = a;
  for (auto& v : neg.values()) v = 255.0f - v;
  EXPECT_LT(ssim(a, neg), 0.0);
  EXPECT_LE(ssim(a, b), 1.0);
}

Embeddings make_embeddings(int dim, std::vector<double> v) {
  return {static_cast<int>(v.size()) / dim, dim, std::move(v)};
}

TEST(Frechet, OneDimensionalClosedForm) {
  // N(1, 2) vs N(3, 8): (1-3)^2 + (sqrt2 - 2 sqrt2)^2 = 6.
  const auto r = frechet_distance(make_embeddings(1, {0, 2}), make_embeddings(1, {1, 5}));
  EXPECT_NEAR(r.distance, 6.0, 1e-9);
  EXPECT_FALSE(r.regularized);
}

TEST(Frechet, ShiftAddsDeltaSquaredPerDimension) {
  Rng rng(3);
  const int dim = 4, n = 40;
  std::vector<double> a(n * dim), b(n * dim);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal();
    b[i] = a[i] + 0.5;
  }
  const auto ea = make_embeddings(dim, a), eb = make_embeddings(dim, b);
  EXPECT_NEAR(frechet_distance(ea, eb).distance, dim * 0.25, 1e-6);
  EXPECT_NEAR(frechet_distance(ea, ea).distance, 0.0, 1e-6);
  EXPECT_NEAR(frechet_distance(ea, eb).distance, frechet_distance(eb, ea).distance, 1e-9);
}

TEST(Frechet, RegularizesSingularCovariance) {
  const auto a = make_embeddings(3, {0, 0, 0, 1, 1, 1});
  const auto b = make_embeddings(3, {1, 0, 0, 0, 1, 2});
  const auto r = frechet_distance(a, b);
  EXPECT_TRUE(r.regularized);
  EXPECT_TRUE(std::isfinite(r.distance));
  EXPECT_THROW(frechet_distance(make_embeddings(3, {0, 0, 0}), b), InvalidArgument);
  EXPECT_THROW(frechet_distance(a, make_embeddings(2, {0, 0, 1, 1})), ShapeError);
}

TEST(Embedder, DeterministicAndRangeAgnostic) {
  EmbeddingExtractorSpec spec;
  spec.seed = 4;
  spec.topology = {8, FeatureExtractorSpec::kPool, 8};
  const Embedder e(spec), e2(spec);
  EXPECT_EQ(e.dim(), 8);
  EXPECT_EQ(e.identity(), e2.identity());
  const std::vector<Image> imgs{smooth_image(16, 16, 1), smooth_image(16, 16, 2)};
  const std::vector<Image> model{to_model_range(imgs[0]), to_model_range(imgs[1])};
  const auto a = e.embed(imgs), b = e2.embed(model);
  ASSERT_EQ(a.count, 2);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-4);
  EXPECT_NEAR(fid(imgs, imgs, e).distance, 0.0, 1e-6);
}

struct EvalFixture {
  std::vector<Image> images;
  MaskSource masks{[] {
    MaskSourceConfig c;
    c.target_height = c.target_width = 32;
    c.strokes.height = c.strokes.width = 32;
    c.strokes.min_thickness = 2;
    c.strokes.max_thickness = 4;
    c.max_strokes = 4;
    return c;
  }()};
  Embedder embedder{[] {
    EmbeddingExtractorSpec s;
    s.topology = {8};
    return s;
  }()};
  EvalFixture() {
    for (int i = 0; i < 4; ++i) images.push_back(smooth_image(32, 32, 10 + i));
  }
  Predictor oracle() const {
    return [this](const Image&, const BinaryMask&, std::size_t i) { return to_model_range(images[i]); };
  }
};

TEST(Evaluate, PerfectPredictorScoresPerfectly) {
  EvalFixture f;
  EvalOptions o;
  o.buckets = {{0.01, 0.1}, {0.1, 0.2}};
  const auto r = evaluate(f.oracle(), f.images, f.masks, o, f.embedder);
  ASSERT_EQ(r.buckets.size(), 2u);
  EXPECT_TRUE(r.failures.empty());
  for (const auto& b : r.buckets) {
    EXPECT_EQ(b.n, 4);
    EXPECT_EQ(b.mae, 0.0);
    EXPECT_EQ(b.psnr, kPsnrCapDb);
    EXPECT_EQ(b.psnr_capped, 4);
    EXPECT_NEAR(b.ssim, 1.0, 1e-12);
    EXPECT_NEAR(b.fid, 0.0, 1e-6);
  }
  EXPECT_EQ(r.buckets[0].label, "0.01-0.10");
  EXPECT_EQ(r.overall.n, 8);
}

TEST(Evaluate, DeterministicAndOverallOnly) {
  EvalFixture f;
  const Predictor flat = [](const Image& masked, const BinaryMask&, std::size_t) { return masked; };
  EvalOptions o;
  o.seed = 3;
  const auto a = evaluate(flat, f.images, f.masks, o, f.embedder);
  const auto b = evaluate(flat, f.images, f.masks, o, f.embedder);
  EXPECT_TRUE(a.buckets.empty());
  EXPECT_EQ(a.overall.label, "overall");
  EXPECT_EQ(a.overall.n, 4);
  EXPECT_EQ(a.overall.mae, b.overall.mae);
  EXPECT_EQ(a.overall.ssim, b.overall.ssim);
  EXPECT_GT(a.overall.mae, 0.0);
  EXPECT_LT(a.overall.psnr, kPsnrCapDb);
}

TEST(Evaluate, CollectsFailuresAndWritesCsv) {
  EvalFixture f;
  const auto good = f.oracle();
  const Predictor flaky = [&](const Image& m, const BinaryMask& k, std::size_t i) {
    if (i == 1) throw std::runtime_error("boom");
    return good(m, k, i);
  };
  EvalOptions o;
  o.buckets = {{0.01, 0.1}};
  const auto r = evaluate(flaky, std::span<const Image>(f.images).first(2), f.masks, o, f.embedder);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].image_index, 1u);
  EXPECT_EQ(r.buckets[0].n, 1);
  EXPECT_TRUE(std::isnan(r.buckets[0].fid));

  rmnet::testing::TempDir dir("report");
  write_report_csv(dir.path() / "m.csv", r);
  std::ifstream in(dir.path() / "m.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0], "bucket,metric,value,n");
  EXPECT_EQ(lines[1], "0.01-0.10,fid,,1");
  EXPECT_EQ(lines[2], "0.01-0.10,mae,0,1");
  EXPECT_EQ(lines[8], "overall,ssim,1,1");
}

TEST(Evaluate, GridImagesAreWritten) {
  EvalFixture f;
  rmnet::testing::TempDir dir("grid");
  EvalOptions o;
  o.grid_dir = dir.path();
  o.grid_limit = 2;
  evaluate(f.oracle(), f.images, f.masks, o, f.embedder);
  int n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++n;
  EXPECT_EQ(n, 2);
}

}  // namespace
