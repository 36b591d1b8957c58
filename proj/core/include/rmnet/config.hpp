#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmnet/feature_extractor.hpp"
#include "rmnet/image.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/metrics.hpp"
#include "rmnet/training.hpp"

// Run configuration: an INI file with one section per concern.
//
//   [run]        seed, out
//   [dataset]    root, image_size, train_fraction, train_manifest, test_manifest
//   [training]   lr_generator, lr_critic, adam_beta1, adam_beta2, adam_epsilon,
//                batch_size, epochs, n_critic, clip_c, lambda, adv_weight,
//                checkpoint_every, max_generator_steps, fixed_masks
//   [generator]  base_filters, encoder_depth, kernel, dilation, leaky_slope,
//                double_width, max_filters
//   [critic]     depth, base_filters, double_width, max_filters, leaky_slope
//   [masks]      mode (synthesize|directory), directory, threshold,
//                strokes_are_holes, min_strokes, max_strokes, min_vertices,
//                max_vertices, min_thickness, max_thickness, max_turn,
//                min_segment, max_segment
//   [extractor]  source (seeded_random|checkpoint), seed, checkpoint, topology
//   [embedder]   source (seeded_small|checkpoint), seed, checkpoint, topology
//   [eval]       buckets ("0.01-0.1,0.1-0.2"), max_tries, grid_limit
//   [ablate]     lambdas ("0,0.1,0.3,0.4,0.5")
//
// Unknown sections or keys are errors. Seeds left unset are derived from the
// run seed.
namespace rmnet {

inline constexpr const char* kCacheDirEnv = "RMNET_CACHE_DIR";

struct DatasetConfig {
  std::filesystem::path root;
  int image_size = 256;
  double train_fraction = 0.9;
  std::optional<std::filesystem::path> train_manifest;
  std::optional<std::filesystem::path> test_manifest;
};

struct EvalSettings {
  std::vector<HoleRatioBucket> buckets;
  int max_tries = 2000;
  int grid_limit = 0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out;
  DatasetConfig dataset;
  TrainConfig train;
  MaskSourceConfig masks;
  FeatureExtractorSpec extractor;
  EmbeddingExtractorSpec embedder;
  EvalSettings eval;
  std::vector<double> ablate_lambdas{0.0, 0.1, 0.3, 0.4, 0.5};

  bool extractor_seed_set = false;
  bool embedder_seed_set = false;
  std::string source_text;  // the file as read, copied into run directories

  // Sets the root seed and re-derives every seed not pinned in the file.
  void set_seed(std::uint64_t root);
};

// Throws ConfigError listing every problem found.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// Checks that the inputs a command needs exist and all values are in range.
// Collects every failure into one ConfigError.
void validate_for_training(const RunConfig& cfg);
void validate_for_eval(const RunConfig& cfg);

// Relative checkpoint paths resolve against $RMNET_CACHE_DIR when it is set.
std::filesystem::path resolve_cached(const std::filesystem::path& p);

std::vector<HoleRatioBucket> parse_buckets(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

}  // namespace rmnet
