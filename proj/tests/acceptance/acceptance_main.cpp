// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// fails. Criterion numbers given as arguments restrict the run to those.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rmnet/errors.hpp"
#include "rmnet/feature_extractor.hpp"
#include "rmnet/losses.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/metrics.hpp"
#include "rmnet/png_io.hpp"
#include "rmnet/training.hpp"
#include "synthetic.hpp"

using namespace rmnet;
namespace fs = std::filesystem;
using rmnet::testing::random_image;
using rmnet::testing::random_mask;
using rmnet::testing::smooth_image;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. mask algebra

Outcome mask_algebra() {
  Rng rng(101);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int h = static_cast<int>(rng.uniform_int(8, 64));
    const int w = static_cast<int>(rng.uniform_int(8, 64));
    const Image x = random_image(h, w, ValueRange::model, rng);
    const Image p = random_image(h, w, ValueRange::model, rng);
    const BinaryMask m = random_mask(h, w, rng.uniform(), rng);
    const BinaryMask r = reverse_mask(m);
    const Image keep = apply_mask(x, m);
    const Image holes = apply_mask(x, r);
    const Image comp = composite(x, p, m);
    bool ok = reverse_mask(r) == m;
    for (int c = 0; c < 3 && ok; ++c) {
      for (int y = 0; y < h && ok; ++y) {
        for (int i = 0; i < w && ok; ++i) {
          const bool vis = m.at(y, i) == 1;
          ok = r.at(y, i) == (vis ? 0 : 1) && keep.at(c, y, i) + holes.at(c, y, i) == x.at(c, y, i) &&
               comp.at(c, y, i) == (vis ? x.at(c, y, i) : p.at(c, y, i));
        }
      }
    }
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(1000 - bad) + "/1000 instances exact"};
}

// ---------------------------------------------------------------------------
// 2. losses

// Double-precision reference for the extractor and the combined loss. Shares
// only the weights with the engine.
using Planes = std::vector<std::vector<double>>;  // [channel][y*w+x]

Planes ref_features(const FeatureExtractor& fx, const std::vector<double>& rgb, int h, int w) {
  const double mean_bgr[3] = {103.939, 116.779, 123.68};
  Planes x(3, std::vector<double>(static_cast<std::size_t>(h) * w));
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < h * w; ++i) x[c][i] = (rgb[(2 - c) * h * w + i] + 1.0) * 127.5 - mean_bgr[c];
  int conv = 0;
  for (int v : fx.spec().topology) {
    if (v == FeatureExtractorSpec::kPool) {
      Planes y(x.size(), std::vector<double>(static_cast<std::size_t>(h / 2) * (w / 2)));
      for (std::size_t c = 0; c < x.size(); ++c)
        for (int oy = 0; oy < h / 2; ++oy)
          for (int ox = 0; ox < w / 2; ++ox)
            y[c][oy * (w / 2) + ox] = std::max({x[c][2 * oy * w + 2 * ox], x[c][2 * oy * w + 2 * ox + 1],
                                                x[c][(2 * oy + 1) * w + 2 * ox], x[c][(2 * oy + 1) * w + 2 * ox + 1]});
      x = std::move(y);
      h /= 2;
      w /= 2;
      continue;
    }
    const std::string name = "conv" + std::to_string(conv++);
    const auto& wt = fx.weights().get(name + ".weight").values;
    const auto& bs = fx.weights().get(name + ".bias").values;
    const int cin = static_cast<int>(x.size());
    Planes y(static_cast<std::size_t>(v), std::vector<double>(static_cast<std::size_t>(h) * w));
    for (int o = 0; o < v; ++o)
      for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
          double s = bs[o];
          for (int c = 0; c < cin; ++c)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int sy = yy + ky - 1, sx = xx + kx - 1;
                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                s += double(wt[((o * cin + c) * 3 + ky) * 3 + kx]) * x[c][sy * w + sx];
              }
          y[o][yy * w + xx] = std::max(s, 0.0);
        }
    x = std::move(y);
  }
  return x;
}

// Sum of squared feature differences and element count, accumulated per sample.
void ref_distance(const FeatureExtractor& fx, const std::vector<double>& a, const std::vector<double>& b,
                  int h, int w, double& sum, double& count) {
  const Planes fa = ref_features(fx, a, h, w), fb = ref_features(fx, b, h, w);
  for (std::size_t c = 0; c < fa.size(); ++c)
    for (std::size_t i = 0; i < fa[c].size(); ++i) {
      sum += (fa[c][i] - fb[c][i]) * (fa[c][i] - fb[c][i]);
      count += 1;
    }
}

double ref_generator_loss(const FeatureExtractor& fx, const Tensor& gt, const std::vector<double>& pred,
                          const Tensor& masks, double lambda) {
  const int h = gt.h(), w = gt.w();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  double sp = 0, np = 0, srm = 0, nrm = 0;
  for (int n = 0; n < gt.n(); ++n) {
    std::vector<double> g(3 * plane), p(3 * plane), gh(3 * plane), ph(3 * plane);
    for (std::size_t i = 0; i < 3 * plane; ++i) {
      g[i] = gt.values()[n * 3 * plane + i];
      p[i] = pred[n * 3 * plane + i];
      const bool hole = masks.values()[n * plane + i % plane] == 0.0f;
      gh[i] = hole ? g[i] : 0.0;
      ph[i] = hole ? p[i] : 0.0;
    }
    ref_distance(fx, g, p, h, w, sp, np);
    ref_distance(fx, gh, ph, h, w, srm, nrm);
  }
  return (1 - lambda) * sp / np + lambda * srm / nrm;
}

Outcome losses() {
  FeatureExtractorSpec spec;
  spec.topology = FeatureExtractorSpec::parse_topology("16,M,32");
  spec.seed = 11;
  const FeatureExtractor fx(spec);
  Rng rng(202);
  std::vector<Image> gt, pred;
  std::vector<BinaryMask> masks;
  for (int i = 0; i < 2; ++i) {
    gt.push_back(random_image(8, 8, ValueRange::model, rng));
    pred.push_back(random_image(8, 8, ValueRange::model, rng));
    masks.push_back(random_mask(8, 8, 0.4, rng));
  }
  const Tensor g = images_to_tensor(gt), p = images_to_tensor(pred), m = masks_to_tensor(masks);
  std::vector<std::string> failed;
  if (perceptual_loss(fx, g, g) != 0.0) failed.push_back("L_p(I,I)");
  if (reverse_mask_loss(fx, g, g, m) != 0.0) failed.push_back("L_rm(I,I)");
  const double lp = perceptual_loss(fx, g, p);
  const double lrm = reverse_mask_loss(fx, g, p, m);
  if (generator_loss(fx, g, p, m, {0.0}).total != lp) failed.push_back("lambda=0");
  if (generator_loss(fx, g, p, m, {1.0}).total != lrm) failed.push_back("lambda=1");
  for (int i = 0; i < 20; ++i) {
    const double l = rng.uniform();
    const double t = generator_loss(fx, g, p, m, {l}).total;
    if (std::fabs(t - ((1 - l) * lp + l * lrm)) > 4 * std::numeric_limits<double>::epsilon() * t) {
      failed.push_back("affinity");
      break;
    }
  }
  // Central differences on the double reference. Float32 differences cannot
  // resolve 1e-3 here: ReLU/max-pool kinks dominate at large steps, rounding
  // at small ones.
  double worst = 0.0, value_gap = 0.0;
  for (double lambda : {0.0, 0.4, 1.0}) {
    Tensor grad;
    const double engine = generator_loss(fx, g, p, m, {lambda}, &grad).total;
    std::vector<double> probe(p.values().begin(), p.values().end());
    value_gap = std::max(value_gap, std::fabs(ref_generator_loss(fx, g, probe, m, lambda) - engine) / engine);
    double diff2 = 0.0, num2 = 0.0, den2 = 0.0;
    const double h = 1e-6;
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const double orig = probe[k];
      probe[k] = orig + h;
      const double up = ref_generator_loss(fx, g, probe, m, lambda);
      probe[k] = orig - h;
      const double down = ref_generator_loss(fx, g, probe, m, lambda);
      probe[k] = orig;
      const double fd = (up - down) / (2 * h);
      diff2 += std::pow(fd - grad.values()[k], 2);
      num2 += fd * fd;
      den2 += std::pow(grad.values()[k], 2);
    }
    worst = std::max(worst, std::sqrt(diff2) / std::max(std::sqrt(num2), std::sqrt(den2)));
  }
  if (!(value_gap < 1e-5)) failed.push_back("reference value");
  if (!(worst < 1e-3)) failed.push_back("gradient");
  std::string d = "gradient rel. error " + fmt("%.2e", worst) + ", reference value gap " + fmt("%.2e", value_gap);
  for (const auto& f : failed) d += "; failed " + f;
  return {failed.empty(), d};
}

// ---------------------------------------------------------------------------
// 3. Wasserstein

Outcome wasserstein() {
  const double hand = wasserstein_loss(std::vector<float>{1, 2}, std::vector<float>{0, 1});
  Rng rng(303);
  bool anti = true;
  for (int i = 0; i < 1000; ++i) {
    std::vector<float> a(static_cast<std::size_t>(rng.uniform_int(1, 8)));
    std::vector<float> b(static_cast<std::size_t>(rng.uniform_int(1, 8)));
    for (auto& v : a) v = static_cast<float>(rng.uniform(-5, 5));
    for (auto& v : b) v = static_cast<float>(rng.uniform(-5, 5));
    anti = anti && wasserstein_loss(a, b) == -wasserstein_loss(b, a);
  }
  return {hand == 1.0 && anti, "hand value " + fmt("%.17g", hand) + (anti ? ", antisymmetric" : ", NOT antisymmetric")};
}

// ---------------------------------------------------------------------------
// 4. metrics

double ref_ssim(const Image& a, const Image& b) {
  auto luma = [](const Image& im, int y, int x) {
    return 0.299 * im.at(0, y, x) + 0.587 * im.at(1, y, x) + 0.114 * im.at(2, y, x);
  };
  double w[11][11], total = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) total += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
  const double c1 = 6.5025, c2 = 58.5225;
  double sum = 0.0;
  int n = 0;
  for (int y0 = 0; y0 + 11 <= a.height(); ++y0)
    for (int x0 = 0; x0 + 11 <= a.width(); ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double k = w[i][j] / total, u = luma(a, y0 + i, x0 + j), v = luma(b, y0 + i, x0 + j);
          ma += k * u;
          mb += k * v;
          saa += k * u * u;
          sbb += k * v * v;
          sab += k * u * v;
        }
      sum += ((2 * ma * mb + c1) * (2 * (sab - ma * mb) + c2)) /
             ((ma * ma + mb * mb + c1) * (saa - ma * ma + sbb - mb * mb + c2));
      ++n;
    }
  return sum / n;
}

Outcome metric_oracles() {
  Rng rng(404);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Image a = random_image(16, 16, ValueRange::unit_8bit, rng);
    const Image b = random_image(16, 16, ValueRange::unit_8bit, rng);
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = double(a.values()[i]) - b.values()[i];
      abs_sum += std::fabs(d);
      sq_sum += d * d;
    }
    const double n = static_cast<double>(a.size());
    worst = std::max({worst, std::fabs(mae(a, b) - abs_sum / n),
                      std::fabs(psnr(a, b).db - 10 * std::log10(65025.0 / (sq_sum / n))),
                      std::fabs(ssim(a, b) - ref_ssim(a, b))});
  }
  const double forty = psnr(Image(8, 8, ValueRange::unit_8bit, 0.0f), Image(8, 8, ValueRange::unit_8bit, 2.55f)).db;

  const int dim = 8, count = 64;
  Embeddings e1{count, dim, std::vector<double>(count * dim)};
  Embeddings e2 = e1;
  for (std::size_t i = 0; i < e1.values.size(); ++i) {
    e1.values[i] = rng.normal();
    e2.values[i] = e1.values[i] + 0.3;
  }
  const double zero = frechet_distance(e1, e1).distance;
  const double shifted = frechet_distance(e1, e2).distance;
  EmbeddingExtractorSpec es;
  es.seed = 5;
  const Embedder embedder(es);
  std::vector<Image> imgs;
  for (int i = 0; i < 6; ++i) imgs.push_back(smooth_image(32, 32, 500 + i));
  const double fid_same = fid(imgs, imgs, embedder).distance;

  const bool ok = worst < 1e-6 && std::fabs(forty - 40.0) < 1e-6 && std::fabs(zero) < 1e-6 &&
                  std::fabs(fid_same) < 1e-6 && std::fabs(shifted - 0.09 * dim) < 1e-4;
  return {ok, "max oracle gap " + fmt("%.2e", worst) + ", PSNR " + fmt("%.9f", forty) + " dB, FID same " +
                  fmt("%.2e", std::max(std::fabs(zero), std::fabs(fid_same))) + ", shifted " +
                  fmt("%.6f", shifted) + " (expect 0.72)"};
}

// ---------------------------------------------------------------------------
// 5. bucketed mask synthesis

Outcome mask_buckets() {
  const MaskSource source{MaskSourceConfig{}};
  const HoleRatioBucket bucket{0.01, 0.6};
  int bad = 0, nondeterministic = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t seed = derive_seed(505, static_cast<std::uint64_t>(i));
    const BinaryMask m = sample_mask_in_bucket(source, bucket, 2000, seed);
    std::size_t holes = 0;
    for (auto v : m.values()) holes += v == 0 ? 1 : 0;
    const double recount = static_cast<double>(holes) / static_cast<double>(m.size());
    if (!bucket.contains(recount) || recount != hole_ratio(m)) ++bad;
    if (!(sample_mask_in_bucket(source, bucket, 2000, seed) == m)) ++nondeterministic;
  }
  return {bad == 0 && nondeterministic == 0,
          std::to_string(1000 - bad) + "/1000 recounts in bucket, " + std::to_string(nondeterministic) +
              " nondeterministic redraws"};
}

// ---------------------------------------------------------------------------
// 6 and 7. smoke training

constexpr int kSmokeSize = 64;
constexpr int kSmokeImages = 16;
constexpr int kSmokeSteps = 1000;
constexpr int kSmoothingWindows = 10;

struct SmokeResult {
  std::vector<double> windows;  // mean L_G per window of consecutive epochs
  double hole_psnr = 0.0;
  double hole_mae = 0.0;
  bool finite = true;
  double seconds = 0.0;
  TrainConfig config;
  ParameterSet generator;
};

SmokeResult smoke_run(std::uint64_t seed, double lambda) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Image> imgs;
  for (int i = 0; i < kSmokeImages; ++i) {
    imgs.push_back(to_model_range(smooth_image(kSmokeSize, kSmokeSize, derive_seed(seed, i))));
  }
  MaskSourceConfig mc;
  mc.target_height = mc.target_width = kSmokeSize;
  mc.strokes.height = mc.strokes.width = kSmokeSize;
  mc.strokes.min_thickness = 3;
  mc.strokes.max_thickness = 7;
  mc.min_strokes = 1;
  mc.max_strokes = 4;
  mc.seed = seed;
  const MaskSource src(mc);
  std::vector<BinaryMask> masks;
  for (int i = 0; i < kSmokeImages; ++i) {
    masks.push_back(sample_mask_in_bucket(src, {0.05, 0.3}, 1000, derive_seed(seed ^ 99, i)));
  }
  FeatureExtractorSpec fs;
  fs.topology = FeatureExtractorSpec::parse_topology("16,M,32");
  fs.seed = 11;
  const FeatureExtractor fx(fs);

  TrainConfig c;
  c.lr_critic = 1e-4;
  c.lambda = lambda;
  c.seed = seed;
  c.image_size = kSmokeSize;
  c.epochs = 1000000;
  c.max_generator_steps = kSmokeSteps;
  c.checkpoint_every = 1;
  c.generator.base_filters = 16;
  c.generator.encoder_depth = 3;
  c.critic.depth = 3;
  c.critic.base_filters = 16;
  const Trainer trainer(c, fx, imgs, masks);
  TrainState state = trainer.initial_state();

  SmokeResult out;
  std::vector<double> epoch_sum;
  std::vector<int> epoch_n;
  TrainHooks hooks;
  hooks.on_record = [&](const StepRecord& r) {
    if (r.kind != StepKind::generator) return;
    if (static_cast<int>(epoch_sum.size()) <= r.epoch) {
      epoch_sum.resize(r.epoch + 1, 0.0);
      epoch_n.resize(r.epoch + 1, 0);
    }
    epoch_sum[r.epoch] += r.l_g;
    ++epoch_n[r.epoch];
    out.finite = out.finite && std::isfinite(r.l_g) && std::isfinite(r.l_p) && std::isfinite(r.l_rm);
  };
  hooks.on_checkpoint = [&](const TrainState& s) {
    out.finite = out.finite && s.generator.all_finite() && s.critic.all_finite();
  };
  try {
    trainer.run(state, hooks);
  } catch (const NonFiniteError&) {
    out.finite = false;
  }

  const int per = static_cast<int>(epoch_sum.size()) / kSmoothingWindows;
  for (int w = 0; w < kSmoothingWindows && per > 0; ++w) {
    double s = 0.0;
    int n = 0;
    for (int e = w * per; e < (w + 1) * per; ++e) {
      s += epoch_sum[e];
      n += epoch_n[e];
    }
    out.windows.push_back(s / n);
  }
  const Generator gen(c.generator);
  for (int i = 0; i < kSmokeImages; ++i) {
    const Image pred = gen.forward(state.generator, apply_mask(imgs[i], masks[i]), masks[i]);
    const Image result = to_8bit_range(composite(imgs[i], pred, masks[i]));
    const Image gt = to_8bit_range(imgs[i]);
    out.hole_psnr += hole_psnr(gt, result, masks[i]).db / kSmokeImages;
    out.hole_mae += hole_mae(gt, result, masks[i]) / kSmokeImages;
  }
  out.config = c;
  out.generator = std::move(state.generator);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  smoke run seed %llu lambda %.1f: hole PSNR %.2f dB, hole MAE %.3f, %.0f s\n",
              static_cast<unsigned long long>(seed), lambda, out.hole_psnr, out.hole_mae, out.seconds);
  std::fflush(stdout);
  return out;
}

std::optional<SmokeResult> g_smoke;  // seed 1, lambda 0.4; reused by 7 and 8

Outcome smoke_training() {
  g_smoke = smoke_run(1, 0.4);
  const auto& r = *g_smoke;
  bool decreasing = r.windows.size() == kSmoothingWindows;
  std::string w = "smoothed L_G";
  for (std::size_t i = 0; i < r.windows.size(); ++i) {
    if (i > 0 && !(r.windows[i] < r.windows[i - 1])) decreasing = false;
    w += " " + fmt("%.1f", r.windows[i]);
  }
  return {decreasing && r.hole_psnr >= 25.0 && r.finite && r.seconds < 1800,
          w + (decreasing ? " (strictly decreasing)" : " (NOT strictly decreasing)") + "; hole PSNR " +
              fmt("%.2f", r.hole_psnr) + " dB; " + (r.finite ? "all finite" : "NON-FINITE")};
}

Outcome lambda_ordering() {
  double with = 0.0, without = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    with += (seed == 1 && g_smoke ? g_smoke->hole_mae : smoke_run(seed, 0.4).hole_mae) / 3.0;
    without += smoke_run(seed, 0.0).hole_mae / 3.0;
  }
  return {with < without, "mean hole MAE lambda=0.4: " + fmt("%.3f", with) + ", lambda=0: " + fmt("%.3f", without)};
}

// ---------------------------------------------------------------------------
// 8. inpaint composite guarantee through the command-line tool

Outcome inpaint_guarantee() {
  rmnet::testing::TempDir dir("acceptance_inpaint");
  GeneratorSpec spec;
  spec.base_filters = 16;
  spec.encoder_depth = 3;
  std::vector<fs::path> ckpts{dir.path() / "random_init"};
  save_generator_checkpoint(ckpts[0], spec, build_generator(spec, 808), 808, 0);
  if (g_smoke) {
    ckpts.push_back(dir.path() / "trained");
    save_generator_checkpoint(ckpts[1], g_smoke->config.generator, g_smoke->generator, 1, kSmokeSteps);
  }
  MaskSourceConfig mc;
  mc.target_height = mc.target_width = kSmokeSize;
  mc.strokes.height = mc.strokes.width = kSmokeSize;
  mc.strokes.min_thickness = 3;
  mc.strokes.max_thickness = 9;
  const MaskSource src(mc);
  float worst = 0.0f;
  int runs = 0, tool_failures = 0;
  for (int i = 0; i < 20; ++i) {
    const fs::path img = dir.path() / ("img_" + std::to_string(i) + ".png");
    const fs::path msk = dir.path() / ("mask_" + std::to_string(i) + ".png");
    Image gt = smooth_image(kSmokeSize, kSmokeSize, 800 + i);
    for (auto& v : gt.values()) v = std::round(v);
    write_png_rgb(img, gt);
    const BinaryMask m = src.draw(derive_seed(808, static_cast<std::uint64_t>(i)));
    write_png_mask(msk, m);
    for (const auto& ck : ckpts) {
      const fs::path out = dir.path() / ("out_" + std::to_string(runs++) + ".png");
      const std::string cmd = std::string("\"") + RMNET_TOOL_PATH + "\" inpaint --checkpoint \"" + ck.string() +
                              "\" --image \"" + img.string() + "\" --mask \"" + msk.string() + "\" --out \"" +
                              out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0 || !fs::exists(out)) {
        ++tool_failures;
        continue;
      }
      const Image res = read_png_rgb(out);
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < kSmokeSize; ++y)
          for (int x = 0; x < kSmokeSize; ++x)
            if (m.at(y, x)) worst = std::max(worst, std::fabs(res.at(c, y, x) - gt.at(c, y, x)));
    }
  }
  return {tool_failures == 0 && worst <= 1.0f,
          std::to_string(runs) + " inpaint runs over 20 images, " + std::to_string(ckpts.size()) +
              " checkpoints; max visible-pixel change " + fmt("%.0f", worst) + "/255" +
              (tool_failures ? "; " + std::to_string(tool_failures) + " tool failures" : "")};
}

// ---------------------------------------------------------------------------
// 9. checkpoint round trip and resume equivalence

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome checkpoint_resume() {
  rmnet::testing::TempDir dir("acceptance_resume");
  std::vector<Image> imgs;
  Rng rng(909);
  std::vector<BinaryMask> masks;
  for (int i = 0; i < 8; ++i) {
    imgs.push_back(to_model_range(smooth_image(32, 32, 900 + i)));
    masks.push_back(random_mask(32, 32, 0.25, rng));
  }
  FeatureExtractorSpec fs;
  fs.topology = FeatureExtractorSpec::parse_topology("8,M,8");
  fs.seed = 9;
  const FeatureExtractor fx(fs);
  TrainConfig c;
  c.lr_critic = 1e-4;
  c.image_size = 32;
  c.batch_size = 3;
  c.n_critic = 2;
  c.epochs = 4;
  c.seed = 9;
  c.checkpoint_every = 3;
  c.generator.base_filters = 8;
  c.generator.encoder_depth = 3;
  c.critic.depth = 3;
  c.critic.base_filters = 8;
  const Trainer trainer(c, fx, imgs, masks);

  TrainState full = trainer.initial_state();
  std::optional<TrainState> at_save;
  trainer.run(full, {{}, [&](const TrainState& s) {
                       if (!at_save && s.generator_steps == 6) {
                         save_training_checkpoint(dir.path() / "a", s, c, fx.identity());
                         at_save = s;
                       }
                     }, {}});
  if (!at_save) return {false, "no checkpoint at step 6"};
  LoadedTraining loaded = load_training_checkpoint(dir.path() / "a");
  const bool params_equal = loaded.state.generator.identical(at_save->generator) &&
                            loaded.state.critic.identical(at_save->critic) &&
                            loaded.state.generator_opt.first_moment().identical(at_save->generator_opt.first_moment()) &&
                            loaded.state.critic_opt.second_moment().identical(at_save->critic_opt.second_moment());
  save_training_checkpoint(dir.path() / "b", loaded.state, loaded.config, loaded.extractor_identity);
  bool bytes_equal = true;
  for (const auto& e : fs::directory_iterator(dir.path() / "a")) {
    bytes_equal = bytes_equal && slurp(e.path()) == slurp(dir.path() / "b" / e.path().filename());
  }
  const Trainer resumed_trainer(loaded.config, fx, imgs, masks);
  resumed_trainer.run(loaded.state);
  bool history_equal = loaded.state.history.size() == full.history.size();
  for (std::size_t i = 0; history_equal && i < full.history.size(); ++i) {
    const auto& a = full.history[i];
    const auto& b = loaded.state.history[i];
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    history_equal = same(a.l_g, b.l_g) && same(a.l_w, b.l_w);
  }
  const bool resume_equal = loaded.state.generator_steps == full.generator_steps &&
                            loaded.state.generator.identical(full.generator) &&
                            loaded.state.critic.identical(full.critic) && history_equal;
  return {params_equal && bytes_equal && resume_equal,
          std::string("save/load ") + (params_equal ? "bit-identical" : "DIFFERS") + ", re-save " +
              (bytes_equal ? "byte-identical" : "DIFFERS") + ", resumed run at step " +
              std::to_string(loaded.state.generator_steps) + (resume_equal ? " matches" : " DIFFERS")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<Criterion> criteria{
      {1, "mask algebra", 10, mask_algebra},
      {2, "loss correctness", 60, losses},
      {3, "Wasserstein loss", 10, wasserstein},
      {4, "metric oracles", 60, metric_oracles},
      {5, "bucketed mask synthesis", 120, mask_buckets},
      {6, "overfit smoke training", 1800, smoke_training},
      {7, "lambda ablation ordering", 5400, lambda_ordering},
      {8, "inpaint composite guarantee", 600, inpaint_guarantee},
      {9, "checkpoint round trip and resume", 600, checkpoint_resume},
  };
  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget of " + fmt("%.0f", c.budget_s) + " s";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
