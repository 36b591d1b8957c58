#include "rmnet/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "rmnet/errors.hpp"
#include "rmnet/mask_algebra.hpp"

namespace rmnet {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string(what) + " is not finite");
}

AdamConfig adam_config(const TrainConfig& cfg, double lr) {
  return AdamConfig{lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};
}

}  // namespace

const char* to_string(StepKind kind) { return kind == StepKind::critic ? "critic" : "generator"; }

void TrainConfig::validate() const {
  if (!(lr_generator > 0.0) || !(lr_critic > 0.0)) throw InvalidArgument("learning rates must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw InvalidArgument("adam betas must lie in [0, 1) and epsilon must be positive");
  }
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (n_critic < 1) throw InvalidArgument("n_critic must be at least 1");
  if (!(clip_c > 0.0)) throw InvalidArgument("clip_c must be positive");
  LossWeights{lambda}.validate();
  if (!(adv_weight >= 0.0)) throw InvalidArgument("adv_weight must be non-negative");
  if (checkpoint_every < 0 || max_generator_steps < 0) {
    throw InvalidArgument("checkpoint_every and max_generator_steps must be non-negative");
  }
  generator.validate();
  critic.validate();
  generator.check_input_size(image_size, image_size);
}

Batch make_batch(std::span<const Image> images, std::span<const BinaryMask> masks) {
  if (images.size() != masks.size()) throw ShapeError("make_batch: image/mask count mismatch");
  Batch b;
  b.real = images_to_tensor(images);
  b.masks = masks_to_tensor(masks);
  b.masked = apply_mask(b.real, b.masks);
  return b;
}

Trainer::Trainer(TrainConfig cfg, const FeatureExtractor& extractor, std::vector<Image> images,
                 const MaskSource& masks)
    : cfg_(std::move(cfg)),
      extractor_(extractor),
      generator_(cfg_.generator),
      critic_(cfg_.critic),
      images_(std::move(images)),
      mask_source_(&masks) {
  cfg_.validate();
  if (images_.empty()) throw InvalidArgument("training set is empty");
  for (const auto& img : images_) {
    if (img.range() != ValueRange::model || img.height() != cfg_.image_size ||
        img.width() != cfg_.image_size) {
      throw ShapeError("training images must be model-range " + std::to_string(cfg_.image_size) +
                       " squared");
    }
  }
  const auto& mc = masks.config();
  if (mc.target_height != cfg_.image_size || mc.target_width != cfg_.image_size) {
    throw ShapeError("mask source size does not match training image size");
  }
  if (cfg_.fixed_masks) {
    fixed_masks_.reserve(images_.size());
    const std::uint64_t mask_seed = derive_seed(cfg_.seed, "fixed_masks");
    for (std::size_t i = 0; i < images_.size(); ++i) {
      fixed_masks_.push_back(masks.draw(derive_seed(mask_seed, i)));
    }
  }
}

Trainer::Trainer(TrainConfig cfg, const FeatureExtractor& extractor, std::vector<Image> images,
                 std::vector<BinaryMask> fixed_masks)
    : cfg_(std::move(cfg)),
      extractor_(extractor),
      generator_(cfg_.generator),
      critic_(cfg_.critic),
      images_(std::move(images)),
      fixed_masks_(std::move(fixed_masks)) {
  cfg_.fixed_masks = true;
  cfg_.validate();
  if (images_.empty()) throw InvalidArgument("training set is empty");
  if (fixed_masks_.size() != images_.size()) throw ShapeError("one fixed mask per image is required");
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (images_[i].range() != ValueRange::model || images_[i].height() != cfg_.image_size ||
        images_[i].width() != cfg_.image_size) {
      throw ShapeError("training images must be model-range " + std::to_string(cfg_.image_size) +
                       " squared");
    }
    if (fixed_masks_[i].height() != cfg_.image_size || fixed_masks_[i].width() != cfg_.image_size) {
      throw ShapeError("fixed mask size does not match training image size");
    }
  }
}

TrainState Trainer::initial_state() const {
  TrainState s;
  s.generator = generator_.initialize(derive_seed(cfg_.seed, "generator"));
  s.critic = critic_.initialize(derive_seed(cfg_.seed, "critic"));
  clip_in_place(s.critic, static_cast<float>(cfg_.clip_c));
  s.generator_opt = Adam(adam_config(cfg_, cfg_.lr_generator), s.generator);
  s.critic_opt = Adam(adam_config(cfg_, cfg_.lr_critic), s.critic);
  s.rng = Rng(derive_seed(cfg_.seed, "data_order"));
  return s;
}

double Trainer::critic_step(TrainState& state, const Batch& batch) const {
  const Tensor pred = generator_.forward(state.generator, batch.masked, batch.masks);
  return critic_update(state, batch.real, composite(batch.real, pred, batch.masks));
}

double Trainer::critic_update(TrainState& state, const Tensor& real, const Tensor& fake) const {
  nn::Trace real_trace;
  nn::Trace fake_trace;
  const auto real_scores = critic_.forward(state.critic, real, &real_trace);
  const auto fake_scores = critic_.forward(state.critic, fake, &fake_trace);
  const double l_w = wasserstein_loss(real_scores, fake_scores);
  require_finite(l_w, "critic loss");

  // Minimise -L_w.
  ParameterSet grads = state.critic.zeros_like();
  const std::vector<float> g_real(real_scores.size(), -1.0f / static_cast<float>(real_scores.size()));
  const std::vector<float> g_fake(fake_scores.size(), 1.0f / static_cast<float>(fake_scores.size()));
  critic_.backward(state.critic, real_trace, g_real, &grads);
  critic_.backward(state.critic, fake_trace, g_fake, &grads);

  ParameterSet updated = state.critic;
  Adam opt = state.critic_opt;
  opt.step(updated, grads);
  clip_in_place(updated, static_cast<float>(cfg_.clip_c));
  if (!updated.all_finite()) throw NonFiniteError("critic parameters became non-finite");
  state.critic = std::move(updated);
  state.critic_opt = std::move(opt);
  ++state.critic_steps;
  return l_w;
}

GeneratorLossTerms Trainer::generator_step(TrainState& state, const Batch& batch) const {
  nn::Trace trace;
  const Tensor pred = generator_.forward(state.generator, batch.masked, batch.masks, &trace);
  Tensor grad_pred;
  const GeneratorLossTerms terms = generator_loss(extractor_, batch.real, pred, batch.masks,
                                                  LossWeights{cfg_.lambda}, &grad_pred);
  require_finite(terms.total, "generator loss");

  if (cfg_.adv_weight > 0.0) {
    const Tensor fake = composite(batch.real, pred, batch.masks);
    nn::Trace critic_trace;
    const auto scores = critic_.forward(state.critic, fake, &critic_trace);
    require_finite(wasserstein_loss(scores, scores), "critic score");
    const std::vector<float> g_scores(
        scores.size(), static_cast<float>(-cfg_.adv_weight / static_cast<double>(scores.size())));
    const Tensor grad_fake = critic_.backward(state.critic, critic_trace, g_scores, nullptr);
    // Only hole pixels of the composite come from the generator.
    const Tensor grad_holes = apply_reverse_mask(grad_fake, batch.masks);
    auto g = grad_pred.values();
    auto h = grad_holes.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += h[i];
  }

  ParameterSet grads = state.generator.zeros_like();
  generator_.backward(state.generator, trace, grad_pred, grads);
  ParameterSet updated = state.generator;
  Adam opt = state.generator_opt;
  opt.step(updated, grads);
  if (!updated.all_finite()) throw NonFiniteError("generator parameters became non-finite");
  state.generator = std::move(updated);
  state.generator_opt = std::move(opt);
  ++state.generator_steps;
  return terms;
}

void Trainer::start_epoch(TrainState& state) const {
  state.epoch_order.resize(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) state.epoch_order[i] = static_cast<int>(i);
  for (std::size_t i = images_.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(state.rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(state.epoch_order[i - 1], state.epoch_order[j]);
  }
  state.batch_cursor = 0;
}

Batch Trainer::next_batch(TrainState& state) const {
  const std::size_t begin = state.batch_cursor;
  const std::size_t end = std::min(begin + static_cast<std::size_t>(cfg_.batch_size), images_.size());
  std::vector<Image> imgs;
  std::vector<BinaryMask> masks;
  for (std::size_t k = begin; k < end; ++k) {
    const int idx = state.epoch_order[k];
    imgs.push_back(images_[idx]);
    if (cfg_.fixed_masks) {
      masks.push_back(fixed_masks_[idx]);
    } else {
      const std::uint64_t s = derive_seed(derive_seed(cfg_.seed, "masks"),
                                          static_cast<std::uint64_t>(state.generator_steps) *
                                                  static_cast<std::uint64_t>(cfg_.batch_size) +
                                              (k - begin));
      masks.push_back(mask_source_->draw(s));
    }
  }
  state.batch_cursor = end;
  return make_batch(imgs, masks);
}

void Trainer::run(TrainState& state, const TrainHooks& hooks) const {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto done = [&] {
    return state.epoch >= cfg_.epochs ||
           (cfg_.max_generator_steps > 0 && state.generator_steps >= cfg_.max_generator_steps);
  };

  while (!done()) {
    if (state.epoch_order.empty() || state.batch_cursor >= state.epoch_order.size()) {
      if (!state.epoch_order.empty()) {
        ++state.epoch;
        state.epoch_order.clear();
        if (done()) break;
      }
      start_epoch(state);
    }
    // Work on a copy so a failure leaves `state` at the last completed batch.
    TrainState work = state;
    try {
      const Batch batch = next_batch(work);
      // The generator is fixed during the critic steps, so its composite is too.
      const Tensor fake = composite(
          batch.real, generator_.forward(work.generator, batch.masked, batch.masks), batch.masks);
      for (int k = 0; k < cfg_.n_critic; ++k) {
        const double l_w = critic_update(work, batch.real, fake);
        StepRecord r{0, StepKind::critic, work.epoch, kNaN, kNaN, kNaN, l_w, elapsed()};
        r.index = static_cast<std::int64_t>(work.history.size());
        work.history.push_back(r);
      }
      const auto terms = generator_step(work, batch);
      StepRecord r{0, StepKind::generator, work.epoch, terms.perceptual, terms.reverse_mask,
                   terms.total, kNaN, elapsed()};
      r.index = static_cast<std::int64_t>(work.history.size());
      work.history.push_back(r);
    } catch (const NonFiniteError& e) {
      if (hooks.on_abort) hooks.on_abort(state, e.what());
      throw;
    }
    const std::size_t first_new = state.history.size();
    state = std::move(work);
    if (hooks.on_record) {
      for (std::size_t i = first_new; i < state.history.size(); ++i) hooks.on_record(state.history[i]);
    }
    if (cfg_.checkpoint_every > 0 && hooks.on_checkpoint &&
        state.generator_steps % cfg_.checkpoint_every == 0) {
      hooks.on_checkpoint(state);
    }
  }
  if (state.batch_cursor >= state.epoch_order.size() && !state.epoch_order.empty() &&
      state.epoch < cfg_.epochs) {
    ++state.epoch;
    state.epoch_order.clear();
  }
  if (hooks.on_checkpoint) hooks.on_checkpoint(state);
}

void append_step_log(const std::filesystem::path& csv, const StepRecord& r) {
  const bool fresh = !std::filesystem::exists(csv) || std::filesystem::file_size(csv) == 0;
  std::ofstream out(csv, std::ios::app);
  if (!out) throw IoError("cannot append to step log " + csv.string());
  if (fresh) out << "step,kind,epoch,l_p,l_rm,l_g,l_w,wall_seconds\n";
  auto field = [&](double v) {
    if (std::isfinite(v)) out << v;
  };
  out.precision(10);
  out << r.index << ',' << to_string(r.kind) << ',' << r.epoch << ',';
  field(r.l_p);
  out << ',';
  field(r.l_rm);
  out << ',';
  field(r.l_g);
  out << ',';
  field(r.l_w);
  out << ',' << r.wall_seconds << '\n';
  if (!out) throw IoError("failed writing step log " + csv.string());
}

}  // namespace rmnet
