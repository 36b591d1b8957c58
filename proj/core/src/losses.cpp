#include "rmnet/losses.hpp"

#include "rmnet/errors.hpp"
#include "rmnet/mask_algebra.hpp"

namespace rmnet {
namespace {

void check_pair(const Tensor& gt, const Tensor& pred, const char* what) {
  require_same_shape(gt, pred, what);
  if (gt.c() != 3) throw ShapeError(std::string(what) + ": expected RGB batches");
}

// Loss between extractor features of `target` and `input`; when `grad_input`
// is set, backpropagates to the input image.
double feature_distance(const FeatureExtractor& fx, const Tensor& target, const Tensor& input,
                        Tensor* grad_input) {
  const Tensor target_features = fx.extract(target);
  if (!grad_input) return feature_mse(fx.extract(input), target_features);
  nn::Trace trace;
  const Tensor features = fx.extract(input, &trace);
  Tensor grad_features;
  const double loss = feature_mse(features, target_features, &grad_features);
  *grad_input = fx.input_gradient(trace, grad_features);
  return loss;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgument("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
}

double feature_mse(const Tensor& a, const Tensor& b, Tensor* grad_a) {
  require_same_shape(a, b, "feature_mse");
  if (a.empty()) throw InvalidArgument("feature_mse: empty feature grid");
  const auto av = a.values();
  const auto bv = b.values();
  const double kappa = static_cast<double>(av.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - static_cast<double>(bv[i]);
    sum += d * d;
  }
  if (grad_a) {
    *grad_a = Tensor(a.n(), a.c(), a.h(), a.w());
    auto g = grad_a->values();
    const double scale = 2.0 / kappa;
    for (std::size_t i = 0; i < av.size(); ++i) {
      g[i] = static_cast<float>(scale * (static_cast<double>(av[i]) - static_cast<double>(bv[i])));
    }
  }
  return sum / kappa;
}

double perceptual_loss(const FeatureExtractor& fx, const Tensor& gt, const Tensor& pred,
                       Tensor* grad_pred) {
  check_pair(gt, pred, "perceptual_loss");
  return feature_distance(fx, gt, pred, grad_pred);
}

double reverse_mask_loss(const FeatureExtractor& fx, const Tensor& gt, const Tensor& pred,
                         const Tensor& masks, Tensor* grad_pred) {
  check_pair(gt, pred, "reverse_mask_loss");
  const Tensor gt_holes = apply_reverse_mask(gt, masks);
  const Tensor pred_holes = apply_reverse_mask(pred, masks);
  if (!grad_pred) return feature_distance(fx, gt_holes, pred_holes, nullptr);
  Tensor grad_holes;
  const double loss = feature_distance(fx, gt_holes, pred_holes, &grad_holes);
  // d(pred (.) M_r)/d(pred) = M_r
  *grad_pred = apply_reverse_mask(grad_holes, masks);
  return loss;
}

GeneratorLossTerms generator_loss(const FeatureExtractor& fx, const Tensor& gt, const Tensor& pred,
                                  const Tensor& masks, const LossWeights& weights,
                                  Tensor* grad_pred) {
  weights.validate();
  const double lambda = weights.lambda;
  GeneratorLossTerms terms;
  Tensor grad_p;
  Tensor grad_rm;
  const bool want_p = grad_pred && lambda < 1.0;
  const bool want_rm = grad_pred && lambda > 0.0;
  terms.perceptual = perceptual_loss(fx, gt, pred, want_p ? &grad_p : nullptr);
  terms.reverse_mask = reverse_mask_loss(fx, gt, pred, masks, want_rm ? &grad_rm : nullptr);
  terms.total = (1.0 - lambda) * terms.perceptual + lambda * terms.reverse_mask;
  if (grad_pred) {
    *grad_pred = Tensor(pred.n(), pred.c(), pred.h(), pred.w());
    auto g = grad_pred->values();
    const float wp = static_cast<float>(1.0 - lambda);
    const float wrm = static_cast<float>(lambda);
    if (want_p) {
      auto gp = grad_p.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += wp * gp[i];
    }
    if (want_rm) {
      auto gr = grad_rm.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += wrm * gr[i];
    }
  }
  return terms;
}

double wasserstein_loss(std::span<const float> critic_real, std::span<const float> critic_fake) {
  if (critic_real.empty() || critic_fake.empty()) {
    throw InvalidArgument("wasserstein_loss: empty critic batch");
  }
  double real = 0.0;
  for (float v : critic_real) real += v;
  double fake = 0.0;
  for (float v : critic_fake) fake += v;
  return real / static_cast<double>(critic_real.size()) -
         fake / static_cast<double>(critic_fake.size());
}

}  // namespace rmnet
