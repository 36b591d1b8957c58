#include "rmnet/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "rmnet/errors.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/png_io.hpp"

namespace rmnet {
namespace {

struct Scored {
  std::vector<Image> gt;
  std::vector<Image> out;
  double mae = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  int capped = 0;
};

void add(Scored& into, const Scored& from) {
  into.gt.insert(into.gt.end(), from.gt.begin(), from.gt.end());
  into.out.insert(into.out.end(), from.out.begin(), from.out.end());
  into.mae += from.mae;
  into.psnr += from.psnr;
  into.ssim += from.ssim;
  into.capped += from.capped;
}

BucketReport summarise(const std::string& label, const HoleRatioBucket& bucket, const Scored& s,
                       const Embedder& embedder) {
  BucketReport r;
  r.label = label;
  r.bucket = bucket;
  r.n = static_cast<int>(s.gt.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (r.n == 0) {
    r.mae = r.psnr = r.ssim = r.fid = nan;
    return r;
  }
  r.mae = s.mae / r.n;
  r.psnr = s.psnr / r.n;
  r.ssim = s.ssim / r.n;
  r.psnr_capped = s.capped;
  if (r.n >= 2) {
    const auto f = fid(s.gt, s.out, embedder);
    r.fid = f.distance;
    r.fid_regularized = f.regularized;
  } else {
    r.fid = nan;
  }
  return r;
}

}  // namespace

Predictor generator_predictor(const Generator& generator, const ParameterSet& params) {
  generator.check_params(params);
  return [&generator, &params](const Image& masked, const BinaryMask& mask, std::size_t) {
    return generator.forward(params, masked, mask);
  };
}

MetricReport evaluate(const Predictor& predict, std::span<const Image> test_images,
                      const MaskSource& masks, const EvalOptions& options,
                      const Embedder& embedder) {
  if (test_images.empty()) throw InvalidArgument("evaluate: test set is empty");
  for (const auto& b : options.buckets) b.validate();
  const bool overall_only = options.buckets.empty();
  std::vector<HoleRatioBucket> buckets =
      overall_only ? std::vector<HoleRatioBucket>{{0.01, 0.6}} : options.buckets;
  if (options.grid_dir) std::filesystem::create_directories(*options.grid_dir);

  MetricReport report;
  Scored all;
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    const auto& bucket = buckets[b];
    const std::string label = overall_only ? "overall" : bucket.label();
    const std::uint64_t bucket_seed = derive_seed(options.seed, b);
    Scored s;
    int grids = 0;
    for (std::size_t i = 0; i < test_images.size(); ++i) {
      try {
        const Image gt = to_model_range(test_images[i]);
        const BinaryMask mask =
            sample_mask_in_bucket(masks, bucket, options.max_tries, derive_seed(bucket_seed, i));
        if (mask.height() != gt.height() || mask.width() != gt.width()) {
          throw ShapeError("mask size does not match test image");
        }
        const Image masked = apply_mask(gt, mask);
        const Image pred = predict(masked, mask, i);
        const Image out8 = to_8bit_range(composite(gt, pred, mask));
        const Image gt8 = to_8bit_range(gt);
        s.mae += mae(gt8, out8);
        const auto p = psnr(gt8, out8);
        s.psnr += p.db;
        s.capped += p.capped ? 1 : 0;
        s.ssim += ssim(gt8, out8);
        if (options.grid_dir && grids < options.grid_limit) {
          const std::vector<Image> panels{to_8bit_range(masked), out8, gt8};
          write_grid_png(*options.grid_dir / (label + "_" + std::to_string(i) + ".png"), panels);
          ++grids;
        }
        s.gt.push_back(gt8);
        s.out.push_back(out8);
      } catch (const DiskFullError&) {
        throw;
      } catch (const std::exception& e) {
        report.failures.push_back({label, i, e.what()});
      }
    }
    if (!overall_only) report.buckets.push_back(summarise(label, bucket, s, embedder));
    add(all, s);
  }
  report.overall = summarise("overall",
                             overall_only ? buckets.front() : HoleRatioBucket{0.0, 1.0}, all,
                             embedder);
  return report;
}

void write_report_csv(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report " + path.string());
  out.precision(10);
  out << "bucket,metric,value,n\n";
  auto rows = [&](const BucketReport& r) {
    auto row = [&](const char* metric, double v) {
      out << r.label << ',' << metric << ',';
      if (std::isfinite(v)) out << v;
      out << ',' << r.n << '\n';
    };
    row("fid", r.fid);
    row("mae", r.mae);
    row("psnr", r.psnr);
    row("ssim", r.ssim);
  };
  for (const auto& b : report.buckets) rows(b);
  rows(report.overall);
  if (!out) throw IoError("failed writing report " + path.string());
}

void write_grid_png(const std::filesystem::path& path, std::span<const Image> panels) {
  if (panels.empty()) throw InvalidArgument("grid needs at least one panel");
  const int h = panels.front().height();
  const int w = panels.front().width();
  const int n = static_cast<int>(panels.size());
  Image grid(h, w * n, ValueRange::unit_8bit);
  for (int p = 0; p < n; ++p) {
    const Image img = to_8bit_range(panels[p]);
    if (img.height() != h || img.width() != w) throw ShapeError("grid panels differ in size");
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) grid.at(c, y, p * w + x) = img.at(c, y, x);
      }
    }
  }
  write_png_rgb(path, grid);
}

}  // namespace rmnet
