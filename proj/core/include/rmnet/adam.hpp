#pragma once

#include <cstdint>

#include "rmnet/parameters.hpp"

namespace rmnet {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

// Adam with bias-corrected moments. The moment tensors mirror the parameter
// layout so they can be checkpointed alongside the weights.
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig cfg, const ParameterSet& params);

  // One update: params -= lr_t * m / (sqrt(v) + eps).
  void step(ParameterSet& params, const ParameterSet& grads);

  const AdamConfig& config() const { return cfg_; }
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }
  std::int64_t steps() const { return t_; }

  ParameterSet& first_moment() { return m_; }
  ParameterSet& second_moment() { return v_; }
  const ParameterSet& first_moment() const { return m_; }
  const ParameterSet& second_moment() const { return v_; }
  void restore(std::int64_t steps, ParameterSet m, ParameterSet v);

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  ParameterSet m_;
  ParameterSet v_;
};

}  // namespace rmnet
