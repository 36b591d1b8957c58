#include "rmnet/adam.hpp"

#include <cmath>

#include "rmnet/errors.hpp"

namespace rmnet {

Adam::Adam(AdamConfig cfg, const ParameterSet& params)
    : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {
  if (!(cfg.learning_rate > 0.0) || cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 ||
      cfg.beta2 >= 1.0 || !(cfg.epsilon > 0.0)) {
    throw InvalidArgument("adam: invalid hyperparameters");
  }
}

void Adam::step(ParameterSet& params, const ParameterSet& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("adam: parameter layout changed");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const float lr_t = static_cast<float>(cfg_.learning_rate * std::sqrt(bc2) / bc1);
  const float b1 = static_cast<float>(cfg_.beta1);
  const float b2 = static_cast<float>(cfg_.beta2);
  const float eps_hat = static_cast<float>(cfg_.epsilon * std::sqrt(bc2));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params[i].values;
    const auto& g = grads[i].values;
    auto& m = m_[i].values;
    auto& v = v_[i].values;
    if (g.size() != w.size()) throw ShapeError("adam: gradient shape mismatch for " + params[i].name);
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = b1 * m[k] + (1.0f - b1) * g[k];
      v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
      w[k] -= lr_t * m[k] / (std::sqrt(v[k]) + eps_hat);
    }
  }
}

void Adam::restore(std::int64_t steps, ParameterSet m, ParameterSet v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw ShapeError("adam: restored moments do not match parameter layout");
  }
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace rmnet
