#include <gtest/gtest.h>

#include "rmnet/errors.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/png_io.hpp"
#include "synthetic.hpp"

using namespace rmnet;
using rmnet::testing::random_image;
using rmnet::testing::random_mask;
using rmnet::testing::TempDir;

namespace {

constexpr std::size_t kPinnedSeed7Holes = 4140;

BinaryMask mask2x2(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  return BinaryMask::from_values(2, 2, {a, b, c, d});
}

Image grey2x2(float a, float b, float c, float d) {
  std::vector<float> v;
  for (int ch = 0; ch < 3; ++ch) v.insert(v.end(), {a, b, c, d});
  return Image::from_planar(2, 2, ValueRange::unit_8bit, v);
}

std::size_t count_zeros(const BinaryMask& m) {
  std::size_t z = 0;
  for (auto v : m.values()) z += v == 0;
  return z;
}

TEST(ReverseMask, Examples) {
  EXPECT_EQ(reverse_mask(BinaryMask(4, 4, 1)), BinaryMask(4, 4, 0));
  EXPECT_EQ(reverse_mask(mask2x2(1, 0, 0, 1)), mask2x2(0, 1, 1, 0));
  Rng rng(1);
  const auto m = random_mask(8, 8, 0.4, rng);
  EXPECT_EQ(reverse_mask(reverse_mask(m)), m);
}

TEST(ApplyMask, Examples) {
  Rng rng(2);
  const Image img = random_image(5, 6, ValueRange::unit_8bit, rng);
  EXPECT_EQ(apply_mask(img, BinaryMask(5, 6, 1)), img);
  const Image blank = apply_mask(img, BinaryMask(5, 6, 0));
  for (float v : blank.values()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(apply_mask(grey2x2(10, 20, 30, 40), mask2x2(1, 0, 0, 1)), grey2x2(10, 0, 0, 40));
}

TEST(MaskedPrediction, Examples) {
  Rng rng(3);
  const Image pred = random_image(4, 4, ValueRange::model, rng);
  const Image none = masked_prediction(pred, BinaryMask(4, 4, 1));
  for (float v : none.values()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(masked_prediction(pred, BinaryMask(4, 4, 0)), pred);
  EXPECT_EQ(masked_prediction(grey2x2(5, 5, 5, 5), mask2x2(1, 0, 0, 1)), grey2x2(0, 5, 5, 0));
}

TEST(Composite, Examples) {
  Rng rng(4);
  const Image g = random_image(4, 4, ValueRange::unit_8bit, rng);
  const auto m = random_mask(4, 4, 0.5, rng);
  EXPECT_EQ(composite(g, g, m), g);
  EXPECT_EQ(composite(g, random_image(4, 4, ValueRange::unit_8bit, rng), BinaryMask(4, 4, 1)), g);
  EXPECT_EQ(composite(grey2x2(1, 2, 3, 4), grey2x2(9, 9, 9, 9), mask2x2(1, 0, 0, 1)),
            grey2x2(1, 9, 9, 4));
}

TEST(Composite, RejectsMismatchedRangesAndShapes) {
  Rng rng(5);
  const Image a = random_image(4, 4, ValueRange::unit_8bit, rng);
  const Image b = random_image(4, 4, ValueRange::model, rng);
  EXPECT_THROW(composite(a, b, BinaryMask(4, 4, 1)), ValueRangeError);
  EXPECT_THROW(composite(a, a, BinaryMask(4, 5, 1)), ShapeError);
  EXPECT_THROW(apply_mask(a, BinaryMask(3, 4, 1)), ShapeError);
}

TEST(HoleRatio, Examples) {
  EXPECT_EQ(hole_ratio(BinaryMask(4, 4, 1)), 0.0);
  EXPECT_EQ(hole_ratio(BinaryMask(4, 4, 0)), 1.0);
  BinaryMask m(4, 4, 1);
  m.set(0, 0, false);
  m.set(1, 2, false);
  m.set(3, 3, false);
  m.set(2, 1, false);
  EXPECT_EQ(hole_ratio(m), 0.25);
}

TEST(MaskAlgebraProperties, HoldElementExactlyOnRandomInstances) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(8, 32));
    const int w = static_cast<int>(rng.uniform_int(8, 32));
    const auto range = trial % 2 ? ValueRange::model : ValueRange::unit_8bit;
    const Image img = random_image(h, w, range, rng);
    const Image pred = random_image(h, w, range, rng);
    const auto m = random_mask(h, w, rng.uniform(), rng);
    const auto r = reverse_mask(m);
    const Image a = apply_mask(img, m);
    const Image b = apply_mask(img, r);
    const Image c = composite(img, pred, m);
    for (int ch = 0; ch < 3; ++ch) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          ASSERT_EQ(a.at(ch, y, x) + b.at(ch, y, x), img.at(ch, y, x));
          if (m.at(y, x)) ASSERT_EQ(c.at(ch, y, x), img.at(ch, y, x));
          else ASSERT_EQ(c.at(ch, y, x), pred.at(ch, y, x));
        }
      }
    }
    for (std::size_t i = 0; i < m.size(); ++i) ASSERT_EQ(m.values()[i] + r.values()[i], 1);
    ASSERT_NEAR(hole_ratio(r), 1.0 - hole_ratio(m), 1e-15);
  }
}

TEST(MaskAlgebraTensor, MatchesImageForms) {
  Rng rng(7);
  std::vector<Image> imgs{random_image(6, 5, ValueRange::model, rng),
                          random_image(6, 5, ValueRange::model, rng)};
  std::vector<Image> preds{random_image(6, 5, ValueRange::model, rng),
                           random_image(6, 5, ValueRange::model, rng)};
  std::vector<BinaryMask> ms{random_mask(6, 5, 0.3, rng), random_mask(6, 5, 0.6, rng)};
  const Tensor t = images_to_tensor(imgs);
  const Tensor p = images_to_tensor(preds);
  const Tensor mt = masks_to_tensor(ms);
  const Tensor a = apply_mask(t, mt);
  const Tensor r = apply_reverse_mask(p, mt);
  const Tensor c = composite(t, p, mt);
  for (int n = 0; n < 2; ++n) {
    EXPECT_EQ(tensor_to_image(a, n, ValueRange::model), apply_mask(imgs[n], ms[n]));
    EXPECT_EQ(tensor_to_image(r, n, ValueRange::model), masked_prediction(preds[n], ms[n]));
    EXPECT_EQ(tensor_to_image(c, n, ValueRange::model), composite(imgs[n], preds[n], ms[n]));
  }
}

TEST(BinaryMaskType, RejectsNonBinaryValues) {
  EXPECT_THROW(BinaryMask::from_values(1, 2, {0, 2}), InvalidArgument);
  EXPECT_THROW(Image::from_planar(1, 1, ValueRange::model, {0.0f, 2.0f, 0.0f}), ValueRangeError);
}

// ---------------------------------------------------------------------------
// Synthesis

StrokeSpec small_spec(int strokes) {
  StrokeSpec s;
  s.num_strokes = strokes;
  s.height = s.width = 64;
  s.min_thickness = 3;
  s.max_thickness = 7;
  return s;
}

TEST(StrokeSynthesis, ZeroStrokesGiveAllVisible) {
  const auto m = synthesize_stroke_mask(small_spec(0), 3);
  EXPECT_EQ(m, BinaryMask(64, 64, 1));
  EXPECT_EQ(hole_ratio(m), 0.0);
}

TEST(StrokeSynthesis, DeterministicPerSeed) {
  const auto spec = small_spec(4);
  EXPECT_EQ(synthesize_stroke_mask(spec, 11), synthesize_stroke_mask(spec, 11));
  EXPECT_NE(synthesize_stroke_mask(spec, 11), synthesize_stroke_mask(spec, 12));
}

TEST(StrokeSynthesis, PinnedRegressionSeed7) {
  StrokeSpec spec;  // 4 strokes, thickness 5-15, 256x256
  const auto m = synthesize_stroke_mask(spec, 7);
  EXPECT_EQ(count_zeros(m), kPinnedSeed7Holes);  // frozen from the first build
  EXPECT_DOUBLE_EQ(hole_ratio(m), static_cast<double>(kPinnedSeed7Holes) / (256.0 * 256.0));
}

TEST(StrokeSynthesis, RejectsTinyCanvas) {
  StrokeSpec s;
  s.height = 4;
  EXPECT_THROW(synthesize_stroke_mask(s, 0), InvalidArgument);
}

MaskSourceConfig thresholds(int target, int threshold, bool strokes_are_holes) {
  MaskSourceConfig c;
  c.target_height = c.target_width = target;
  c.binarize_threshold = threshold;
  c.strokes_are_holes = strokes_are_holes;
  return c;
}

GrayImage uniform_gray(int h, int w, std::uint8_t v) {
  return GrayImage{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, v)};
}

TEST(Binarize, UniformInputsAndPolarity) {
  EXPECT_EQ(binarize_and_resize(uniform_gray(32, 32, 255), thresholds(16, 127, true)),
            BinaryMask(16, 16, 1));
  EXPECT_EQ(binarize_and_resize(uniform_gray(32, 32, 0), thresholds(16, 127, true)),
            BinaryMask(16, 16, 0));
  EXPECT_EQ(binarize_and_resize(uniform_gray(32, 32, 255), thresholds(16, 127, false)),
            BinaryMask(16, 16, 0));
  // Tie rule: exactly the threshold is the dark class.
  EXPECT_EQ(binarize_and_resize(uniform_gray(8, 8, 127), thresholds(8, 127, true)),
            BinaryMask(8, 8, 0));
  EXPECT_EQ(binarize_and_resize(uniform_gray(8, 8, 128), thresholds(8, 127, true)),
            BinaryMask(8, 8, 1));
}

TEST(Binarize, PixelCheckerboardAveragesTo127Point5) {
  // 1-pixel checkerboard halved: every output pixel averages one 2x2 block = 127.5.
  GrayImage g{512, 512, std::vector<std::uint8_t>(512 * 512)};
  for (int y = 0; y < 512; ++y)
    for (int x = 0; x < 512; ++x) g.values[y * 512 + x] = ((x + y) % 2) ? 255 : 0;
  EXPECT_EQ(binarize_and_resize(g, thresholds(256, 127, true)), BinaryMask(256, 256, 1));
  EXPECT_EQ(binarize_and_resize(g, thresholds(256, 128, true)), BinaryMask(256, 256, 0));
}

TEST(Binarize, TwoByTwoCellCheckerboardKeepsItsPattern) {
  // Cells line up with the 2x2 footprints, so each output pixel sees one cell.
  GrayImage g{512, 512, std::vector<std::uint8_t>(512 * 512)};
  for (int y = 0; y < 512; ++y)
    for (int x = 0; x < 512; ++x) g.values[y * 512 + x] = ((x / 2 + y / 2) % 2) ? 255 : 0;
  const auto m = binarize_and_resize(g, thresholds(256, 127, true));
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x) ASSERT_EQ(m.at(y, x), (x + y) % 2 ? 1 : 0);
}

MaskSourceConfig synth_config(int min_strokes, int max_strokes, std::uint64_t seed) {
  MaskSourceConfig c;
  c.target_height = c.target_width = 64;
  c.strokes = small_spec(0);
  c.min_strokes = min_strokes;
  c.max_strokes = max_strokes;
  c.seed = seed;
  return c;
}

TEST(BucketSampling, FullBucketAcceptsFirstDraw) {
  const MaskSource src(synth_config(1, 4, 5));
  const auto m = sample_mask_in_bucket(src, {0.0, 1.0}, 1, 99);
  EXPECT_EQ(m, src.draw(derive_seed(99, std::uint64_t{0})));
}

TEST(BucketSampling, UnsatisfiableBucketThrows) {
  const MaskSource src(synth_config(1, 1, 5));
  EXPECT_THROW(sample_mask_in_bucket(src, {0.99, 1.0}, 10, 1), BucketUnsatisfiableError);
}

TEST(BucketSampling, AcceptedMasksReverifyByRecount) {
  const MaskSource src(synth_config(1, 12, 8));
  for (int i = 0; i < 200; ++i) {
    const auto m = sample_mask_in_bucket(src, {0.01, 0.6}, 1000, static_cast<std::uint64_t>(i));
    const double ratio = static_cast<double>(count_zeros(m)) / static_cast<double>(m.size());
    ASSERT_GE(ratio, 0.01);
    ASSERT_LE(ratio, 0.6);
  }
}

TEST(BucketSampling, InvalidBucketRejected) {
  const MaskSource src(synth_config(1, 4, 5));
  EXPECT_THROW(sample_mask_in_bucket(src, {0.5, 0.2}, 10, 1), InvalidArgument);
}

TEST(MaskDirectory, LoadsSortedFilesAndBinarises) {
  TempDir dir("maskdir");
  BinaryMask a(16, 16, 1);
  a.set(3, 4, false);
  write_png_mask(dir.path() / "b.png", a);
  write_png_mask(dir.path() / "a.PNG", BinaryMask(16, 16, 0));
  write_png_gray(dir.path() / "c.txt", uniform_gray(2, 2, 0));
  const auto files = list_png_files(dir.path());
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].filename(), "a.PNG");
  MaskSourceConfig c;
  c.mode = MaskSourceMode::load_directory;
  c.directory = dir.path();
  c.target_height = c.target_width = 16;
  EXPECT_EQ(load_mask_file(dir.path() / "b.png", c), a);
  const MaskSource src(c);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto m = src.draw(s);
    EXPECT_TRUE(m == a || m == BinaryMask(16, 16, 0));
    EXPECT_EQ(m, src.draw(s));
  }
}

TEST(MaskDirectory, ColourMaskIsConvertedAndFlagged) {
  TempDir dir("colourmask");
  Image img(8, 8, ValueRange::unit_8bit, 255.0f);
  // Pure red has luma 0.299 * 255 = 76: dark, so a hole.
  img.at(1, 0, 0) = 0.0f;
  img.at(2, 0, 0) = 0.0f;
  write_png_rgb(dir.path() / "m.png", img);
  MaskSourceConfig c = thresholds(8, 127, true);
  bool colour = false;
  const auto m = load_mask_file(dir.path() / "m.png", c, &colour);
  EXPECT_TRUE(colour);
  EXPECT_EQ(m.at(0, 0), 0);
  EXPECT_EQ(count_zeros(m), 1u);
}

}  // namespace
