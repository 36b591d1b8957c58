#include "rmnet/feature_extractor.hpp"

#include <sstream>

#include "rmnet/errors.hpp"
#include "rmnet/param_store.hpp"
#include "rmnet/rng.hpp"

namespace rmnet {

FeatureExtractorSpec FeatureExtractorSpec::vgg19_block3_conv3_random(std::uint64_t seed) {
  FeatureExtractorSpec s;
  s.seed = seed;
  return s;
}

FeatureExtractorSpec FeatureExtractorSpec::vgg19_block3_conv3_pretrained(
    std::filesystem::path checkpoint) {
  FeatureExtractorSpec s;
  s.source = WeightsSource::pretrained_checkpoint;
  s.checkpoint = std::move(checkpoint);
  return s;
}

std::vector<int> FeatureExtractorSpec::parse_topology(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InvalidArgument("empty entry in topology '" + text + "'");
    item = item.substr(b, e - b + 1);
    if (item == "M" || item == "m") {
      out.push_back(kPool);
      continue;
    }
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v <= 0) {
      throw InvalidArgument("bad topology entry '" + item + "' in '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string FeatureExtractorSpec::format_topology(const std::vector<int>& topology) {
  std::string s;
  for (std::size_t i = 0; i < topology.size(); ++i) {
    if (i) s += ",";
    s += topology[i] == kPool ? std::string("M") : std::to_string(topology[i]);
  }
  return s;
}

void FeatureExtractorSpec::validate() const {
  bool any_conv = false;
  for (int v : topology) {
    if (v == kPool) continue;
    if (v <= 0) throw InvalidArgument("extractor topology widths must be positive");
    any_conv = true;
  }
  if (!any_conv) throw InvalidArgument("extractor topology needs at least one conv layer");
  if (topology.back() == kPool) throw InvalidArgument("extractor topology must end with a conv layer");
  if (source == WeightsSource::pretrained_checkpoint && checkpoint.empty()) {
    throw InvalidArgument("pretrained extractor needs a checkpoint path");
  }
}

FeatureExtractor::FeatureExtractor(FeatureExtractorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  // [-1, 1] RGB -> [0, 255] BGR minus channel means.
  net_.emplace<nn::ChannelAffine>(
      127.5f, std::vector<int>{2, 1, 0},
      std::vector<float>{127.5f - kExtractorMeanBgr[0], 127.5f - kExtractorMeanBgr[1],
                         127.5f - kExtractorMeanBgr[2]});
  ParameterSet layout;
  int channels = 3;
  int conv_index = 0;
  for (int v : spec_.topology) {
    if (v == FeatureExtractorSpec::kPool) {
      net_.emplace<nn::MaxPool2>();
      reduction_ *= 2;
      continue;
    }
    nn::ConvConfig cfg;
    cfg.in_channels = channels;
    cfg.out_channels = v;
    cfg.padding = nn::Padding::same(3, 1, nn::PadMode::zero);
    net_.emplace<nn::Conv2d>(layout, "conv" + std::to_string(conv_index++), cfg);
    net_.emplace<nn::LeakyRelu>(0.0f);
    channels = v;
  }
  out_channels_ = channels;

  if (spec_.source == WeightsSource::seeded_random) {
    weights_ = layout;
    Rng rng(spec_.seed);
    for (auto& p : weights_) {
      if (p.shape.size() < 2) continue;
      nn::init_fan_in_uniform(p, p.shape[1] * p.shape[2] * p.shape[3], 1.41421356f, rng);
    }
  } else {
    LoadedCheckpoint ckpt = load_checkpoint_dir(spec_.checkpoint);
    auto it = ckpt.groups.find("features");
    if (it == ckpt.groups.end()) {
      throw CorruptCheckpointError("extractor checkpoint " + spec_.checkpoint.string() +
                                   " has no 'features' tensor group");
    }
    weights_ = std::move(it->second);
    if (weights_.size() != layout.size()) {
      throw CorruptCheckpointError("extractor checkpoint has " + std::to_string(weights_.size()) +
                                   " tensors, topology needs " + std::to_string(layout.size()));
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (weights_[i].name != layout[i].name || weights_[i].shape != layout[i].shape) {
        throw CorruptCheckpointError("extractor checkpoint tensor '" + weights_[i].name +
                                     "' does not match topology slot '" + layout[i].name + "'");
      }
    }
    if (!weights_.all_finite()) throw CorruptCheckpointError("extractor checkpoint has non-finite weights");
  }
  digest_ = weights_.digest();
}

std::string FeatureExtractor::identity() const {
  std::string src = spec_.source == WeightsSource::seeded_random
                        ? "seeded_random(" + std::to_string(spec_.seed) + ")"
                        : "pretrained_checkpoint(" + spec_.checkpoint.string() + ")";
  return src + " topology=" + FeatureExtractorSpec::format_topology(spec_.topology) +
         " sha256=" + digest_;
}

Tensor FeatureExtractor::extract(const Tensor& images, nn::Trace* trace) const {
  if (images.c() != 3) throw ShapeError("extractor: expected RGB batch, got " + images.shape_string());
  return net_.forward(weights_, images, trace);
}

Tensor FeatureExtractor::input_gradient(const nn::Trace& trace, const Tensor& grad_features) const {
  return net_.backward(weights_, trace, grad_features, nullptr);
}

}  // namespace rmnet
