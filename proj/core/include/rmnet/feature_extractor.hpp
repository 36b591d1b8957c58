#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rmnet/layers.hpp"
#include "rmnet/parameters.hpp"
#include "rmnet/tensor.hpp"

namespace rmnet {

enum class WeightsSource { seeded_random, pretrained_checkpoint };

// Frozen VGG-style feature map: 3x3 same-padded convs with ReLU, with
// max-pools where the topology says so. The default topology is VGG-19 cut
// after block3_conv3 (256 channels at 1/4 resolution).
struct FeatureExtractorSpec {
  static constexpr int kPool = -1;

  std::vector<int> topology{64, 64, kPool, 128, 128, kPool, 256, 256, 256};
  WeightsSource source = WeightsSource::seeded_random;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint;  // pretrained_checkpoint only

  static FeatureExtractorSpec vgg19_block3_conv3_random(std::uint64_t seed);
  static FeatureExtractorSpec vgg19_block3_conv3_pretrained(std::filesystem::path checkpoint);
  // Parses "64,64,M,128" style topology strings.
  static std::vector<int> parse_topology(const std::string& text);
  static std::string format_topology(const std::vector<int>& topology);

  void validate() const;
};

// Per-channel means (BGR order) subtracted after mapping [-1, 1] to [0, 255].
inline constexpr float kExtractorMeanBgr[3] = {103.939f, 116.779f, 123.68f};

class FeatureExtractor {
 public:
  // Loads or generates the weights. Throws CorruptCheckpointError / IoError
  // for unusable checkpoints.
  explicit FeatureExtractor(FeatureExtractorSpec spec);

  const FeatureExtractorSpec& spec() const { return spec_; }
  // Read-only: nothing outside this class can update the weights.
  const ParameterSet& weights() const { return weights_; }
  const std::string& weights_digest() const { return digest_; }
  // Source description plus weight digest, for run logs.
  std::string identity() const;

  int output_channels() const { return out_channels_; }
  int reduction() const { return reduction_; }

  // Model-range RGB batch -> feature grid. Preprocessing is part of the chain.
  Tensor extract(const Tensor& images, nn::Trace* trace = nullptr) const;
  // d(loss)/d(images) for a traced extract(); no parameter gradients are formed.
  Tensor input_gradient(const nn::Trace& trace, const Tensor& grad_features) const;

 private:
  FeatureExtractorSpec spec_;
  nn::Sequential net_;
  ParameterSet weights_;
  std::string digest_;
  int out_channels_ = 3;
  int reduction_ = 1;
};

}  // namespace rmnet
