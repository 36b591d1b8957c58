#pragma once

#include <span>

#include "rmnet/feature_extractor.hpp"
#include "rmnet/tensor.hpp"

namespace rmnet {

// Weight of the reverse-mask term in the generator objective.
struct LossWeights {
  double lambda = 0.4;

  void validate() const;
};

struct GeneratorLossTerms {
  double perceptual = 0.0;    // L_p
  double reverse_mask = 0.0;  // L_rm
  double total = 0.0;         // (1 - lambda) L_p + lambda L_rm
};

// Mean squared difference of two feature grids: sum((a - b)^2) / kappa with
// kappa = a.size() (every feature element in the batch). If `grad_a` is
// non-null it receives d/da = 2 (a - b) / kappa.
double feature_mse(const Tensor& a, const Tensor& b, Tensor* grad_a = nullptr);

// Ground truth vs prediction compared through the frozen extractor. All
// images are model-range N x 3 x H x W batches; `masks` is N x 1 x H x W with
// 1 = visible. Optional outputs receive d(loss)/d(pred).
double perceptual_loss(const FeatureExtractor& fx, const Tensor& gt, const Tensor& pred,
                       Tensor* grad_pred = nullptr);

// Both images are cut to the holes (x (.) (1 - M)) in pixel space before
// feature extraction, so only the predicted hole content is compared.
double reverse_mask_loss(const FeatureExtractor& fx, const Tensor& gt, const Tensor& pred,
                         const Tensor& masks, Tensor* grad_pred = nullptr);

GeneratorLossTerms generator_loss(const FeatureExtractor& fx, const Tensor& gt, const Tensor& pred,
                                  const Tensor& masks, const LossWeights& weights,
                                  Tensor* grad_pred = nullptr);

// mean(critic_real) - mean(critic_fake). The critic maximises this; the
// generator's adversarial term is -mean(critic_fake).
double wasserstein_loss(std::span<const float> critic_real, std::span<const float> critic_fake);

}  // namespace rmnet
