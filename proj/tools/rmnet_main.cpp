#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "rmnet/commands.hpp"
#include "rmnet/config.hpp"
#include "rmnet/errors.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "INI run configuration");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "root seed (overrides [run] seed)");
  cmd->add_option("--out", c.out, "output location (overrides [run] out)");
}

rmnet::RunConfig load(const Common& c) {
  rmnet::RunConfig cfg = c.config.empty() ? rmnet::parse_run_config("") : rmnet::load_run_config(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  if (!c.out.empty()) cfg.out = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reverse-masking image inpainting: training, evaluation, and inference"};
  app.require_subcommand(1);

  Common train_opts;
  std::string resume;
  auto* train = app.add_subcommand("train", "train a generator/critic pair");
  add_common(train, train_opts, true);
  train->add_option("--resume", resume, "training checkpoint directory to continue from");

  Common eval_opts;
  std::string eval_ckpt;
  auto* eval = app.add_subcommand("eval", "score a checkpoint on the test split");
  add_common(eval, eval_opts, true);
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint directory")->required();

  Common inpaint_opts;
  std::string inpaint_ckpt, image, mask;
  auto* inpaint = app.add_subcommand("inpaint", "fill the holes of one image");
  add_common(inpaint, inpaint_opts, false);
  inpaint->add_option("--checkpoint", inpaint_ckpt, "checkpoint directory")->required();
  inpaint->add_option("--image", image, "input PNG")->required()->check(CLI::ExistingFile);
  inpaint->add_option("--mask", mask, "mask PNG")->required()->check(CLI::ExistingFile);

  Common masks_opts;
  int count = 0;
  int size = 0;
  int max_tries = 2000;
  std::string bucket_text;
  auto* make_masks = app.add_subcommand("make-masks", "write synthetic stroke masks");
  add_common(make_masks, masks_opts, false);
  make_masks->add_option("--count", count, "number of masks")->required()->check(CLI::NonNegativeNumber);
  make_masks->add_option("--bucket", bucket_text, "hole-ratio interval lo-hi, e.g. 0.01-0.6");
  make_masks->add_option("--size", size, "mask side length (default: [dataset] image_size)");
  make_masks->add_option("--max-tries", max_tries, "draws per mask before giving up");

  Common ablate_opts;
  std::string lambdas_text;
  auto* ablate = app.add_subcommand("ablate", "train and evaluate once per lambda");
  add_common(ablate, ablate_opts, true);
  ablate->add_option("--lambdas", lambdas_text, "comma-separated lambda values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto cfg = load(train_opts);
      std::optional<std::filesystem::path> r;
      if (!resume.empty()) r = resume;
      return rmnet::cmd_train(cfg, std::cout, std::cerr, r);
    }
    if (*eval) {
      return rmnet::cmd_eval(load(eval_opts), eval_ckpt, std::cout, std::cerr);
    }
    if (*inpaint) {
      if (inpaint_opts.out.empty()) {
        std::cerr << "inpaint: --out <file.png> is required\n";
        return rmnet::kExitConfig;
      }
      Common c = inpaint_opts;
      c.out.clear();
      const auto cfg = load(c);
      return rmnet::cmd_inpaint(inpaint_ckpt, image, mask, inpaint_opts.out, cfg.masks, std::cout,
                                std::cerr);
    }
    if (*make_masks) {
      if (masks_opts.out.empty()) {
        std::cerr << "make-masks: --out <dir> is required\n";
        return rmnet::kExitConfig;
      }
      auto cfg = load(masks_opts);
      auto mc = cfg.masks;
      if (size > 0) {
        mc.target_height = mc.target_width = size;
        mc.strokes.height = mc.strokes.width = size;
      }
      std::optional<rmnet::HoleRatioBucket> bucket;
      if (!bucket_text.empty()) {
        const auto b = rmnet::parse_buckets(bucket_text);
        if (b.size() != 1) throw rmnet::ConfigError("--bucket takes exactly one interval");
        bucket = b.front();
      }
      return rmnet::cmd_make_masks(mc, count, bucket, max_tries, cfg.out, std::cout, std::cerr);
    }
    if (*ablate) {
      auto cfg = load(ablate_opts);
      const auto lambdas =
          lambdas_text.empty() ? cfg.ablate_lambdas : rmnet::parse_number_list(lambdas_text);
      return rmnet::cmd_ablate(cfg, lambdas, std::cout, std::cerr);
    }
  } catch (const rmnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return rmnet::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rmnet::kExitFailure;
  }
  return rmnet::kExitFailure;
}
