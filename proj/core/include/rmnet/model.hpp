#pragma once

#include <cstdint>
#include <vector>

#include "rmnet/image.hpp"
#include "rmnet/layers.hpp"
#include "rmnet/parameters.hpp"
#include "rmnet/tensor.hpp"

namespace rmnet {

// Encoder-decoder generator. Encoder blocks: dilated KxK conv (zero "same"
// padding), LeakyReLU, 2x2 max-pool. Decoder blocks: bilinear x2 resize,
// reflection padding, 4x4 stride-1 conv, LeakyReLU. A final reflection-padded
// conv maps to RGB through tanh. The input is the masked image (3 channels)
// concatenated with its mask (1 channel).
struct GeneratorSpec {
  int input_channels = 4;
  int base_filters = 64;
  int kernel = 5;
  int dilation = 2;
  float leaky_slope = 0.2f;
  int encoder_depth = 4;
  int decoder_kernel = 4;
  int output_kernel = 3;
  // false: every block has base_filters; true: doubles per level up to max_filters.
  bool double_width = false;
  int max_filters = 512;

  void validate() const;
  // Encoder width at `level` (0-based).
  int encoder_filters(int level) const;
  // Decoder width at block `level` (0 = closest to the bottleneck).
  int decoder_filters(int level) const;
  // Throws ShapeError unless h and w are positive multiples of 2^encoder_depth.
  void check_input_size(int height, int width) const;
};

// Wasserstein critic: stride-2 KxK convs with LeakyReLU, global average
// pooling, then a linear head giving one unbounded score per sample. No
// normalisation layers; the weights are kept small by clipping instead.
struct CriticSpec {
  int input_channels = 3;
  int depth = 4;
  int base_filters = 64;
  bool double_width = true;
  int max_filters = 512;
  int kernel = 4;
  float leaky_slope = 0.2f;

  void validate() const;
  int filters(int level) const;
};

class Generator {
 public:
  explicit Generator(GeneratorSpec spec);

  const GeneratorSpec& spec() const { return spec_; }
  // Zero-valued parameters with the network's names and shapes.
  const ParameterSet& layout() const { return layout_; }
  // Fan-in scaled uniform weights, zero biases; deterministic in `seed`.
  ParameterSet initialize(std::uint64_t seed) const;
  // Throws ShapeError when names or shapes differ from the layout.
  void check_params(const ParameterSet& params) const;

  // masked: N x 3 x H x W in [-1, 1]; masks: N x 1 x H x W of 0/1.
  // Returns N x 3 x H x W in [-1, 1].
  Tensor forward(const ParameterSet& params, const Tensor& masked, const Tensor& masks,
                 nn::Trace* trace = nullptr) const;
  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void backward(const ParameterSet& params, const nn::Trace& trace, const Tensor& grad_output,
                ParameterSet& grads) const;

  Image forward(const ParameterSet& params, const Image& masked, const BinaryMask& mask) const;

 private:
  GeneratorSpec spec_;
  ParameterSet layout_;
  nn::Sequential net_;
};

class Critic {
 public:
  explicit Critic(CriticSpec spec);

  const CriticSpec& spec() const { return spec_; }
  const ParameterSet& layout() const { return layout_; }
  ParameterSet initialize(std::uint64_t seed) const;
  void check_params(const ParameterSet& params) const;

  // One score per sample of an N x 3 x H x W batch.
  std::vector<float> forward(const ParameterSet& params, const Tensor& images,
                             nn::Trace* trace = nullptr) const;
  // Accumulates parameter gradients (if `grads` is non-null) and returns
  // d(loss)/d(images) given d(loss)/d(score) per sample.
  Tensor backward(const ParameterSet& params, const nn::Trace& trace,
                  const std::vector<float>& grad_scores, ParameterSet* grads) const;

 private:
  CriticSpec spec_;
  ParameterSet layout_;
  nn::Sequential net_;
};

ParameterSet build_generator(const GeneratorSpec& spec, std::uint64_t seed);
ParameterSet build_critic(const CriticSpec& spec, std::uint64_t seed);

// Element-wise clamp of every tensor into [-c, c].
ParameterSet clip_critic_params(const ParameterSet& params, float c);
void clip_in_place(ParameterSet& params, float c);

}  // namespace rmnet
