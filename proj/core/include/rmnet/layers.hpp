#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rmnet/parameters.hpp"
#include "rmnet/rng.hpp"
#include "rmnet/tensor.hpp"

namespace rmnet::nn {

enum class PadMode { zero, reflect };

struct Padding {
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;
  PadMode mode = PadMode::zero;

  // Output size equals input size at stride 1 (extra row/col goes after for even kernels).
  static Padding same(int kernel, int dilation, PadMode mode);
};

struct ConvConfig {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 3;
  int kernel_w = 3;
  int stride = 1;
  int dilation = 1;
  Padding padding;
};

// What a layer keeps from its forward pass for the backward pass.
struct LayerCache {
  Tensor input;
  Tensor output;
  std::vector<std::uint32_t> argmax;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  // `cache` is null for inference-only passes.
  virtual Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const = 0;
  // Returns d(loss)/d(input). Parameter gradients are accumulated into
  // `grads` (same layout as `params`) unless it is null.
  virtual Tensor backward(const ParameterSet& params, const LayerCache& cache,
                          const Tensor& grad_out, ParameterSet* grads) const = 0;
};

// Registers `<name>.weight` [out, in, kh, kw] and `<name>.bias` [out] in the
// layout passed at construction.
class Conv2d final : public Layer {
 public:
  Conv2d(ParameterSet& layout, const std::string& name, ConvConfig cfg);

  std::string kind() const override { return "conv2d"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;

  const ConvConfig& config() const { return cfg_; }
  std::size_t weight_index() const { return weight_; }
  std::size_t bias_index() const { return bias_; }
  int fan_in() const { return cfg_.in_channels * cfg_.kernel_h * cfg_.kernel_w; }

 private:
  ConvConfig cfg_;
  std::size_t weight_;
  std::size_t bias_;
};

// Fully connected map on N x C x 1 x 1 inputs.
class Linear final : public Layer {
 public:
  Linear(ParameterSet& layout, const std::string& name, int in_features, int out_features);

  std::string kind() const override { return "linear"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;

  std::size_t weight_index() const { return weight_; }
  std::size_t bias_index() const { return bias_; }
  int fan_in() const { return in_; }

 private:
  int in_;
  int out_;
  std::size_t weight_;
  std::size_t bias_;
};

// slope 0 gives a plain ReLU.
class LeakyRelu final : public Layer {
 public:
  explicit LeakyRelu(float slope) : slope_(slope) {}
  std::string kind() const override { return slope_ == 0.0f ? "relu" : "leaky_relu"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;

 private:
  float slope_;
};

class Tanh final : public Layer {
 public:
  std::string kind() const override { return "tanh"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;
};

// 2x2 window, stride 2. Odd trailing rows/columns are dropped.
class MaxPool2 final : public Layer {
 public:
  std::string kind() const override { return "max_pool_2x2"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;
};

// Bilinear x2 resize with half-pixel centres and edge clamping.
class UpsampleBilinear2 final : public Layer {
 public:
  std::string kind() const override { return "upsample_bilinear_2x"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;
};

class GlobalAvgPool final : public Layer {
 public:
  std::string kind() const override { return "global_avg_pool"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;
};

// y[c] = scale * x[source[c]] + offset[c]; a fixed, parameter-free input map.
class ChannelAffine final : public Layer {
 public:
  ChannelAffine(float scale, std::vector<int> source, std::vector<float> offset);
  std::string kind() const override { return "channel_affine"; }
  Tensor forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const ParameterSet& params, const LayerCache& cache, const Tensor& grad_out,
                  ParameterSet* grads) const override;

 private:
  float scale_;
  std::vector<int> source_;
  std::vector<float> offset_;
};

struct Trace {
  std::vector<LayerCache> caches;
};

// Layer chain sharing one ParameterSet layout.
class Sequential {
 public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  std::size_t size() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  // Throws NonFiniteError naming the first layer whose output is not finite.
  Tensor forward(const ParameterSet& params, const Tensor& x, Trace* trace = nullptr) const;
  Tensor backward(const ParameterSet& params, const Trace& trace, const Tensor& grad_out,
                  ParameterSet* grads) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Uniform(-b, b) with b = gain * sqrt(3 / fan_in); weights only, biases stay 0.
void init_fan_in_uniform(Parameter& weight, int fan_in, float gain, Rng& rng);

}  // namespace rmnet::nn
