#include "rmnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "rmnet/errors.hpp"
#include "rmnet/rng.hpp"

namespace rmnet {
namespace {

// He-style gain for LeakyReLU stacks.
constexpr float kInitGain = 1.41421356f;

void check_layout(const ParameterSet& layout, const ParameterSet& params, const char* what) {
  if (params.size() != layout.size()) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(layout.size()) +
                     " parameter tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params[i].name != layout[i].name || params[i].shape != layout[i].shape ||
        params[i].values.size() != layout[i].values.size()) {
      throw ShapeError(std::string(what) + ": parameter " + std::to_string(i) + " is '" +
                       params[i].name + "', expected '" + layout[i].name + "' with matching shape");
    }
  }
}

ParameterSet initialize_layout(const ParameterSet& layout, std::uint64_t seed) {
  ParameterSet params = layout;
  Rng rng(seed);
  for (auto& p : params) {
    if (p.shape.size() < 2) continue;  // biases stay zero
    int fan_in = 1;
    for (std::size_t d = 1; d < p.shape.size(); ++d) fan_in *= p.shape[d];
    nn::init_fan_in_uniform(p, fan_in, kInitGain, rng);
  }
  return params;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (input_channels != 4) {
    throw InvalidArgument("generator input must be 4 channels (masked RGB + mask)");
  }
  if (base_filters < 1 || kernel < 1 || dilation < 1 || encoder_depth < 1 || decoder_kernel < 1 ||
      output_kernel < 1 || max_filters < base_filters) {
    throw InvalidArgument("generator spec has non-positive or inconsistent sizes");
  }
  if (!(leaky_slope >= 0.0f && leaky_slope < 1.0f)) {
    throw InvalidArgument("generator leaky slope must lie in [0, 1)");
  }
}

int GeneratorSpec::encoder_filters(int level) const {
  if (!double_width) return base_filters;
  long f = base_filters;
  for (int i = 0; i < level && f < max_filters; ++i) f *= 2;
  return static_cast<int>(std::min<long>(f, max_filters));
}

int GeneratorSpec::decoder_filters(int level) const {
  return encoder_filters(std::max(encoder_depth - 2 - level, 0));
}

void GeneratorSpec::check_input_size(int height, int width) const {
  const int factor = 1 << encoder_depth;
  if (height <= 0 || width <= 0 || height % factor != 0 || width % factor != 0) {
    throw ShapeError("generator input " + std::to_string(height) + "x" + std::to_string(width) +
                     " must be a positive multiple of " + std::to_string(factor) +
                     " (2^encoder_depth)");
  }
}

void CriticSpec::validate() const {
  if (input_channels < 1 || depth < 1 || base_filters < 1 || kernel < 1 ||
      max_filters < base_filters) {
    throw InvalidArgument("critic spec has non-positive or inconsistent sizes");
  }
  if (!(leaky_slope >= 0.0f && leaky_slope < 1.0f)) {
    throw InvalidArgument("critic leaky slope must lie in [0, 1)");
  }
}

int CriticSpec::filters(int level) const {
  if (!double_width) return base_filters;
  long f = base_filters;
  for (int i = 0; i < level && f < max_filters; ++i) f *= 2;
  return static_cast<int>(std::min<long>(f, max_filters));
}

// ---------------------------------------------------------------------------

Generator::Generator(GeneratorSpec spec) : spec_(spec) {
  spec_.validate();
  int channels = spec_.input_channels;
  for (int i = 0; i < spec_.encoder_depth; ++i) {
    nn::ConvConfig cfg;
    cfg.in_channels = channels;
    cfg.out_channels = spec_.encoder_filters(i);
    cfg.kernel_h = cfg.kernel_w = spec_.kernel;
    cfg.dilation = spec_.dilation;
    cfg.padding = nn::Padding::same(spec_.kernel, spec_.dilation, nn::PadMode::zero);
    net_.emplace<nn::Conv2d>(layout_, "enc" + std::to_string(i), cfg);
    net_.emplace<nn::LeakyRelu>(spec_.leaky_slope);
    net_.emplace<nn::MaxPool2>();
    channels = cfg.out_channels;
  }
  for (int i = 0; i < spec_.encoder_depth; ++i) {
    net_.emplace<nn::UpsampleBilinear2>();
    nn::ConvConfig cfg;
    cfg.in_channels = channels;
    cfg.out_channels = spec_.decoder_filters(i);
    cfg.kernel_h = cfg.kernel_w = spec_.decoder_kernel;
    cfg.padding = nn::Padding::same(spec_.decoder_kernel, 1, nn::PadMode::reflect);
    net_.emplace<nn::Conv2d>(layout_, "dec" + std::to_string(i), cfg);
    net_.emplace<nn::LeakyRelu>(spec_.leaky_slope);
    channels = cfg.out_channels;
  }
  nn::ConvConfig out;
  out.in_channels = channels;
  out.out_channels = 3;
  out.kernel_h = out.kernel_w = spec_.output_kernel;
  out.padding = nn::Padding::same(spec_.output_kernel, 1, nn::PadMode::reflect);
  net_.emplace<nn::Conv2d>(layout_, "out", out);
  net_.emplace<nn::Tanh>();
}

ParameterSet Generator::initialize(std::uint64_t seed) const {
  return initialize_layout(layout_, seed);
}

void Generator::check_params(const ParameterSet& params) const {
  check_layout(layout_, params, "generator");
}

Tensor Generator::forward(const ParameterSet& params, const Tensor& masked, const Tensor& masks,
                          nn::Trace* trace) const {
  check_params(params);
  if (masked.c() != 3) throw ShapeError("generator: masked batch must have 3 channels, got " + masked.shape_string());
  if (masks.c() != 1 || masks.n() != masked.n() || masks.h() != masked.h() || masks.w() != masked.w()) {
    throw ShapeError("generator: mask batch " + masks.shape_string() + " does not match " +
                     masked.shape_string());
  }
  spec_.check_input_size(masked.h(), masked.w());
  for (float v : masked.values()) {
    if (!(v >= -1.0f && v <= 1.0f)) throw ValueRangeError("generator: masked input outside [-1, 1]");
  }
  for (float v : masks.values()) {
    if (v != 0.0f && v != 1.0f) throw InvalidArgument("generator: mask values must be 0 or 1");
  }
  return net_.forward(params, concat_channels(masked, masks), trace);
}

void Generator::backward(const ParameterSet& params, const nn::Trace& trace,
                         const Tensor& grad_output, ParameterSet& grads) const {
  check_params(grads);
  net_.backward(params, trace, grad_output, &grads);
}

Image Generator::forward(const ParameterSet& params, const Image& masked,
                         const BinaryMask& mask) const {
  if (masked.range() != ValueRange::model) {
    throw ValueRangeError("generator: input image must be in model range [-1, 1]");
  }
  const Tensor out = forward(params, images_to_tensor(std::span(&masked, 1)),
                             masks_to_tensor(std::span(&mask, 1)));
  return tensor_to_image(out, 0, ValueRange::model);
}

// ---------------------------------------------------------------------------

Critic::Critic(CriticSpec spec) : spec_(spec) {
  spec_.validate();
  int channels = spec_.input_channels;
  for (int i = 0; i < spec_.depth; ++i) {
    nn::ConvConfig cfg;
    cfg.in_channels = channels;
    cfg.out_channels = spec_.filters(i);
    cfg.kernel_h = cfg.kernel_w = spec_.kernel;
    cfg.stride = 2;
    const int pad = (spec_.kernel - 1) / 2;
    cfg.padding = nn::Padding{pad, pad, pad, pad, nn::PadMode::zero};
    net_.emplace<nn::Conv2d>(layout_, "conv" + std::to_string(i), cfg);
    net_.emplace<nn::LeakyRelu>(spec_.leaky_slope);
    channels = cfg.out_channels;
  }
  net_.emplace<nn::GlobalAvgPool>();
  net_.emplace<nn::Linear>(layout_, "head", channels, 1);
}

ParameterSet Critic::initialize(std::uint64_t seed) const { return initialize_layout(layout_, seed); }

void Critic::check_params(const ParameterSet& params) const {
  check_layout(layout_, params, "critic");
}

std::vector<float> Critic::forward(const ParameterSet& params, const Tensor& images,
                                   nn::Trace* trace) const {
  check_params(params);
  if (images.c() != spec_.input_channels) {
    throw ShapeError("critic: expected " + std::to_string(spec_.input_channels) +
                     " channels, got " + images.shape_string());
  }
  const Tensor out = net_.forward(params, images, trace);
  return std::vector<float>(out.values().begin(), out.values().end());
}

Tensor Critic::backward(const ParameterSet& params, const nn::Trace& trace,
                        const std::vector<float>& grad_scores, ParameterSet* grads) const {
  if (grads) check_params(*grads);
  Tensor g(static_cast<int>(grad_scores.size()), 1, 1, 1);
  std::copy(grad_scores.begin(), grad_scores.end(), g.data());
  return net_.backward(params, trace, g, grads);
}

ParameterSet build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  return Generator(spec).initialize(seed);
}

ParameterSet build_critic(const CriticSpec& spec, std::uint64_t seed) {
  return Critic(spec).initialize(seed);
}

ParameterSet clip_critic_params(const ParameterSet& params, float c) {
  ParameterSet out = params;
  clip_in_place(out, c);
  return out;
}

void clip_in_place(ParameterSet& params, float c) {
  if (!(c > 0.0f)) throw InvalidArgument("clip constant must be positive");
  for (auto& p : params) {
    for (float& v : p.values) v = std::min(std::max(v, -c), c);
  }
}

}  // namespace rmnet
