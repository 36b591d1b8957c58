#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rmnet/adam.hpp"
#include "rmnet/feature_extractor.hpp"
#include "rmnet/image.hpp"
#include "rmnet/losses.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/model.hpp"
#include "rmnet/rng.hpp"

namespace rmnet {

struct TrainConfig {
  double lr_generator = 1e-4;
  // Effectively freezes the critic; override for practical runs.
  double lr_critic = 1e-12;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
  int batch_size = 5;
  int epochs = 1;
  int n_critic = 5;
  double clip_c = 0.01;
  double lambda = 0.4;
  // Generator objective is L_G + adv_weight * (-mean critic score on the composite).
  double adv_weight = 1e-3;
  std::uint64_t seed = 0;
  int image_size = 256;
  int checkpoint_every = 0;            // generator steps between checkpoints; 0 = never
  std::int64_t max_generator_steps = 0;  // stop early once reached; 0 = run all epochs
  // true: one mask per training image, drawn once; false: fresh masks every batch.
  bool fixed_masks = true;
  GeneratorSpec generator;
  CriticSpec critic;

  void validate() const;
};

enum class StepKind { critic, generator };

// One optimiser update. Loss fields that do not apply to the update kind are NaN.
struct StepRecord {
  std::int64_t index = 0;  // running count over all updates
  StepKind kind = StepKind::generator;
  int epoch = 0;
  double l_p = 0.0;
  double l_rm = 0.0;
  double l_g = 0.0;
  double l_w = 0.0;
  double wall_seconds = 0.0;
};

struct TrainState {
  std::int64_t generator_steps = 0;
  std::int64_t critic_steps = 0;
  int epoch = 0;
  std::size_t batch_cursor = 0;     // next batch start within epoch_order
  std::vector<int> epoch_order;     // sample permutation of the current epoch
  ParameterSet generator;
  ParameterSet critic;
  Adam generator_opt;
  Adam critic_opt;
  Rng rng;
  std::vector<StepRecord> history;  // append-only
};

// A batch ready for one update: ground truth, its masked version, and masks.
struct Batch {
  Tensor real;    // N x 3 x H x W, model range
  Tensor masked;  // real (.) masks
  Tensor masks;   // N x 1 x H x W
};

Batch make_batch(std::span<const Image> images, std::span<const BinaryMask> masks);

struct TrainHooks {
  std::function<void(const StepRecord&)> on_record;
  // Called every cfg.checkpoint_every generator steps and at the end.
  std::function<void(const TrainState&)> on_checkpoint;
  // Called with the last consistent state before a non-finite failure propagates.
  std::function<void(const TrainState&, const std::string&)> on_abort;
};

class Trainer {
 public:
  // `images` are model-range training images of cfg.image_size squared.
  // With cfg.fixed_masks the masks are drawn once per image from `masks`.
  Trainer(TrainConfig cfg, const FeatureExtractor& extractor, std::vector<Image> images,
          const MaskSource& masks);
  // Uses the given per-image masks as the fixed masks.
  Trainer(TrainConfig cfg, const FeatureExtractor& extractor, std::vector<Image> images,
          std::vector<BinaryMask> fixed_masks);

  const TrainConfig& config() const { return cfg_; }
  const Generator& generator() const { return generator_; }
  const Critic& critic() const { return critic_; }
  const std::vector<BinaryMask>& fixed_masks() const { return fixed_masks_; }

  TrainState initial_state() const;

  // One critic update: ascend L_w, then clip to [-clip_c, clip_c]. Returns
  // L_w as evaluated before the update. The generator is not modified.
  double critic_step(TrainState& state, const Batch& batch) const;
  // One generator update; the critic is not modified.
  GeneratorLossTerms generator_step(TrainState& state, const Batch& batch) const;

  // Runs n_critic critic steps then one generator step per batch until
  // cfg.epochs are done or cfg.max_generator_steps is reached.
  void run(TrainState& state, const TrainHooks& hooks = {}) const;

 private:
  Batch next_batch(TrainState& state) const;
  double critic_update(TrainState& state, const Tensor& real, const Tensor& fake) const;
  void start_epoch(TrainState& state) const;

  TrainConfig cfg_;
  const FeatureExtractor& extractor_;
  Generator generator_;
  Critic critic_;
  std::vector<Image> images_;
  std::vector<BinaryMask> fixed_masks_;
  const MaskSource* mask_source_ = nullptr;
};

// Training checkpoint: TrainState + TrainConfig + extractor identity, stored
// in the checkpoint directory format.
void save_training_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                              const TrainConfig& cfg, const std::string& extractor_identity);

struct LoadedTraining {
  TrainState state;
  TrainConfig config;
  std::string extractor_identity;
};
LoadedTraining load_training_checkpoint(const std::filesystem::path& dir);

// Generator-only view of any checkpoint that carries a generator.
struct LoadedGenerator {
  GeneratorSpec spec;
  ParameterSet params;
  std::int64_t generator_steps = 0;
};
LoadedGenerator load_generator_checkpoint(const std::filesystem::path& dir);
void save_generator_checkpoint(const std::filesystem::path& dir, const GeneratorSpec& spec,
                               const ParameterSet& params, std::uint64_t seed,
                               std::int64_t generator_steps);

// Append-only CSV step log: step,kind,epoch,l_p,l_rm,l_g,l_w,wall_seconds.
void append_step_log(const std::filesystem::path& csv, const StepRecord& record);

const char* to_string(StepKind kind);

}  // namespace rmnet
