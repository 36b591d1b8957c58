#include "rmnet/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rmnet/dataset.hpp"
#include "rmnet/errors.hpp"
#include "rmnet/evaluate.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/png_io.hpp"
#include "rmnet/serialization.hpp"

namespace rmnet {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

FeatureExtractorSpec resolved_extractor(const RunConfig& cfg) {
  FeatureExtractorSpec s = cfg.extractor;
  s.checkpoint = resolve_cached(s.checkpoint);
  return s;
}

EmbeddingExtractorSpec resolved_embedder(const RunConfig& cfg) {
  EmbeddingExtractorSpec s = cfg.embedder;
  s.checkpoint = resolve_cached(s.checkpoint);
  return s;
}

DatasetSplit split_for(const RunConfig& cfg) {
  SplitSpec spec;
  spec.train_fraction = cfg.dataset.train_fraction;
  spec.seed = derive_seed(cfg.seed, "split");
  spec.train_manifest = cfg.dataset.train_manifest;
  spec.test_manifest = cfg.dataset.test_manifest;
  return load_split(cfg.dataset.root, spec, cfg.dataset.image_size);
}

void write_text(const fs::path& p, const std::string& text) {
  write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

json run_record(const RunConfig& cfg, const std::string& extractor_identity) {
  json j;
  j["seed"] = cfg.seed;
  j["dataset"] = {{"root", cfg.dataset.root.string()},
                  {"image_size", cfg.dataset.image_size},
                  {"train_fraction", cfg.dataset.train_fraction}};
  j["training"] = cfg.train;
  j["masks"] = cfg.masks;
  j["extractor"] = {{"topology", FeatureExtractorSpec::format_topology(cfg.extractor.topology)},
                    {"identity", extractor_identity}};
  return j;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DiskFullError& e) {
    err << "disk full: " << e.what() << '\n';
    return kExitDiskFull;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

void print_report(std::ostream& out, const MetricReport& r) {
  auto line = [&](const BucketReport& b) {
    out << "  " << b.label << "  n=" << b.n << "  fid=" << fmt_number(b.fid)
        << "  mae=" << fmt_number(b.mae) << "  psnr=" << fmt_number(b.psnr)
        << "  ssim=" << fmt_number(b.ssim) << '\n';
  };
  for (const auto& b : r.buckets) line(b);
  line(r.overall);
}

MetricReport run_eval(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& out,
                      std::ostream& err) {
  const LoadedGenerator g = load_generator_checkpoint(resolve_cached(checkpoint));
  const DatasetSplit split = split_for(cfg);
  if (split.test.empty()) throw ConfigError("test split is empty");
  int skipped = 0;
  const auto images = load_images(split.root, split.test, cfg.dataset.image_size, &skipped);
  if (skipped > 0) err << "warning: skipped " << skipped << " unreadable test images\n";
  if (images.empty()) throw InvalidArgument("no readable test images");
  const Generator generator(g.spec);
  generator.spec().check_input_size(cfg.dataset.image_size, cfg.dataset.image_size);
  const Embedder embedder(resolved_embedder(cfg));
  const MaskSource masks(cfg.masks);

  EvalOptions opt;
  opt.buckets = cfg.eval.buckets;
  opt.max_tries = cfg.eval.max_tries;
  opt.seed = derive_seed(cfg.seed, "eval");
  opt.grid_limit = cfg.eval.grid_limit;
  fs::create_directories(cfg.out);
  if (!fs::exists(cfg.out / "config.ini")) write_text(cfg.out / "config.ini", cfg.source_text);
  if (cfg.eval.grid_limit > 0) opt.grid_dir = cfg.out / "grids";
  out << "evaluating " << images.size() << " images with embedder " << embedder.identity() << '\n';
  MetricReport report =
      evaluate(generator_predictor(generator, g.params), images, masks, opt, embedder);
  write_report_csv(cfg.out / "metrics.csv", report);
  std::string failures = "bucket,image,message\n";
  for (const auto& f : report.failures) {
    failures += f.bucket + "," + split.test[f.image_index].generic_string() + ",\"" + f.message + "\"\n";
  }
  write_text(cfg.out / "failures.csv", failures);
  print_report(out, report);
  return report;
}

}  // namespace

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err,
              const std::optional<fs::path>& resume) {
  return guarded(err, [&] {
    validate_for_training(cfg);
    const DatasetSplit split = split_for(cfg);
    if (split.train.empty()) throw ConfigError("training split is empty");
    if (split.skipped > 0) err << "warning: skipped " << split.skipped << " non-PNG files\n";
    int skipped = 0;
    auto images = load_images(split.root, split.train, cfg.dataset.image_size, &skipped);
    if (skipped > 0) err << "warning: skipped " << skipped << " unreadable training images\n";
    if (images.empty()) throw InvalidArgument("no readable training images");

    const FeatureExtractor extractor(resolved_extractor(cfg));
    const MaskSource masks(cfg.masks);
    const Trainer trainer(cfg.train, extractor, std::move(images), masks);

    TrainState state;
    if (resume) {
      LoadedTraining loaded = load_training_checkpoint(resolve_cached(*resume));
      if (loaded.extractor_identity != extractor.identity()) {
        throw ConfigError("resume checkpoint was trained with a different feature extractor");
      }
      if (json(loaded.config.generator) != json(cfg.train.generator) ||
          json(loaded.config.critic) != json(cfg.train.critic)) {
        throw ConfigError("resume checkpoint architecture differs from the config");
      }
      state = std::move(loaded.state);
      out << "resuming at generator step " << state.generator_steps << '\n';
    } else {
      state = trainer.initial_state();
    }

    fs::create_directories(cfg.out / "checkpoints");
    write_text(cfg.out / "config.ini", cfg.source_text);
    write_text(cfg.out / "run.json", run_record(cfg, extractor.identity()).dump(2) + "\n");
    write_split_manifests(cfg.out / "split", split);

    const fs::path log = cfg.out / "steps.csv";
    const std::string identity = extractor.identity();
    out << "training on " << split.train.size() << " images, extractor " << identity << '\n';
    TrainHooks hooks;
    hooks.on_record = [&](const StepRecord& r) {
      append_step_log(log, r);
      if (r.kind == StepKind::generator) {
        out << "epoch " << r.epoch << "  l_g " << fmt_number(r.l_g) << "  l_p " << fmt_number(r.l_p)
            << "  l_rm " << fmt_number(r.l_rm) << '\n';
      }
    };
    hooks.on_checkpoint = [&](const TrainState& s) {
      if (cfg.train.checkpoint_every <= 0 || s.generator_steps % cfg.train.checkpoint_every != 0) {
        return;
      }
      char name[32];
      std::snprintf(name, sizeof name, "step_%08lld", static_cast<long long>(s.generator_steps));
      save_training_checkpoint(cfg.out / "checkpoints" / name, s, trainer.config(), identity);
    };
    hooks.on_abort = [&](const TrainState& s, const std::string& why) {
      err << "aborting: " << why << "; last good state saved to checkpoints/abort\n";
      save_training_checkpoint(cfg.out / "checkpoints" / "abort", s, trainer.config(), identity);
    };
    trainer.run(state, hooks);
    save_training_checkpoint(cfg.out / "checkpoints" / "final", state, trainer.config(), identity);
    out << "done: " << state.generator_steps << " generator steps, " << state.critic_steps
        << " critic steps\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_eval(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    validate_for_eval(cfg);
    const MetricReport report = run_eval(cfg, checkpoint, out, err);
    if (!report.failures.empty()) {
      err << report.failures.size() << " samples failed; see failures.csv\n";
      return static_cast<int>(kExitPartial);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_inpaint(const fs::path& checkpoint, const fs::path& image, const fs::path& mask,
                const fs::path& output, const MaskSourceConfig& mask_cfg, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const LoadedGenerator g = load_generator_checkpoint(resolve_cached(checkpoint));
    const Generator generator(g.spec);
    const Image img8 = read_png_rgb(image);
    generator.spec().check_input_size(img8.height(), img8.width());
    MaskSourceConfig mc = mask_cfg;
    mc.target_height = img8.height();
    mc.target_width = img8.width();
    const BinaryMask m = load_mask_file(mask, mc);

    const auto t0 = std::chrono::steady_clock::now();
    const Image pred = generator.forward(g.params, apply_mask(to_model_range(img8), m), m);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Composite in the 8-bit domain so visible pixels are copied bit-exactly.
    write_png_rgb(output, composite(img8, to_8bit_range(pred), m));
    out << output.string() << "  latency " << fmt_number(seconds) << " s  hole_ratio "
        << fmt_number(hole_ratio(m)) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_make_masks(const MaskSourceConfig& cfg, int count, const std::optional<HoleRatioBucket>& bucket,
                   int max_tries, const fs::path& outdir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (count < 0) throw ConfigError("count must be non-negative");
    if (bucket) bucket->validate();
    if (cfg.mode == MaskSourceMode::load_directory && fs::exists(outdir) &&
        fs::equivalent(outdir, cfg.directory)) {
      throw ConfigError("output directory must differ from the mask input directory");
    }
    const MaskSource source(cfg);
    fs::create_directories(outdir);
    std::string manifest = "filename,hole_ratio,seed\n";
    for (int i = 0; i < count; ++i) {
      const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
      const BinaryMask m =
          bucket ? sample_mask_in_bucket(source, *bucket, max_tries, seed) : source.draw(seed);
      char name[32];
      std::snprintf(name, sizeof name, "mask_%06d.png", i);
      write_png_mask(outdir / name, m);
      char row[96];
      std::snprintf(row, sizeof row, "%s,%.9f,%llu\n", name, hole_ratio(m),
                    static_cast<unsigned long long>(seed));
      manifest += row;
    }
    write_text(outdir / "manifest.csv", manifest);
    out << "wrote " << count << " masks to " << outdir.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_ablate(const RunConfig& cfg, const std::vector<double>& lambdas, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (lambdas.empty()) throw ConfigError("lambda list is empty");
    validate_for_training(cfg);
    fs::create_directories(cfg.out);
    std::string csv = "lambda,status,fid,mae,psnr,ssim\n";
    int completed = 0;
    for (double lambda : lambdas) {
      RunConfig run = cfg;
      run.train.lambda = lambda;
      run.out = cfg.out / ("lambda_" + fmt_number(lambda));
      out << "== lambda " << fmt_number(lambda) << '\n';
      std::string row = fmt_number(lambda);
      int code = cmd_train(run, out, err);
      if (code == kExitOk) {
        try {
          const MetricReport r = run_eval(run, run.out / "checkpoints" / "final", out, err);
          auto f = [](double v) { return std::isfinite(v) ? fmt_number(v) : std::string(); };
          row += ",ok," + f(r.overall.fid) + "," + f(r.overall.mae) + "," + f(r.overall.psnr) +
                 "," + f(r.overall.ssim);
          ++completed;
        } catch (const std::exception& e) {
          err << "lambda " << fmt_number(lambda) << " eval failed: " << e.what() << '\n';
          row += ",eval_failed,,,,";
        }
      } else {
        row += ",train_failed,,,,";
      }
      csv += row + "\n";
      write_text(cfg.out / "ablation.csv", csv);
    }
    out << completed << "/" << lambdas.size() << " lambda runs completed\n";
    return static_cast<int>(completed == static_cast<int>(lambdas.size()) ? kExitOk : kExitPartial);
  });
}

}  // namespace rmnet
