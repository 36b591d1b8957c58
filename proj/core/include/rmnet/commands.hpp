#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "rmnet/config.hpp"
#include "rmnet/image.hpp"
#include "rmnet/mask_synthesis.hpp"

// Command implementations behind the rmnet tool. Each returns a process exit
// code and reports progress to `out`, errors to `err`.
namespace rmnet {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDiskFull = 3,
  kExitPartial = 4,
};

// Trains per `cfg` into cfg.out: config.ini (verbatim), run.json,
// split/{train,test}.txt, steps.csv, checkpoints/step_<n>, checkpoints/final.
// `resume` continues from a training checkpoint.
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err,
              const std::optional<std::filesystem::path>& resume = std::nullopt);

// Scores `checkpoint` on the test split into cfg.out: metrics.csv,
// failures.csv, and grids/ when eval.grid_limit > 0.
int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& out,
             std::ostream& err);

// Fills the holes of one image and writes the composite as PNG. The mask file
// is binarised with `mask_cfg` (threshold and polarity).
int cmd_inpaint(const std::filesystem::path& checkpoint, const std::filesystem::path& image,
                const std::filesystem::path& mask, const std::filesystem::path& output,
                const MaskSourceConfig& mask_cfg, std::ostream& out, std::ostream& err);

// Writes `count` masks (visible 255, hole 0) plus manifest.csv
// (filename,hole_ratio,seed). With a bucket, every mask's ratio lies in it.
int cmd_make_masks(const MaskSourceConfig& cfg, int count,
                   const std::optional<HoleRatioBucket>& bucket, int max_tries,
                   const std::filesystem::path& outdir, std::ostream& out, std::ostream& err);

// One train + eval per lambda under cfg.out/lambda_<value>, then
// cfg.out/ablation.csv with lambda,status,fid,mae,psnr,ssim.
int cmd_ablate(const RunConfig& cfg, const std::vector<double>& lambdas, std::ostream& out,
               std::ostream& err);

}  // namespace rmnet
