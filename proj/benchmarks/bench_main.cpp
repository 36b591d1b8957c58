#include <benchmark/benchmark.h>

#include "rmnet/feature_extractor.hpp"
#include "rmnet/layers.hpp"
#include "rmnet/losses.hpp"
#include "rmnet/mask_algebra.hpp"
#include "rmnet/mask_synthesis.hpp"
#include "rmnet/metrics.hpp"
#include "rmnet/model.hpp"
#include "rmnet/rng.hpp"
#include "rmnet/training.hpp"

using namespace rmnet;

namespace {

Tensor random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(n, c, h, w);
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

Image random_8bit(int size, std::uint64_t seed) {
  Rng rng(seed);
  Image img(size, size, ValueRange::unit_8bit);
  for (auto& v : img.values()) v = static_cast<float>(rng.uniform(0, 255));
  return img;
}

void BM_ConvForward(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  const int size = static_cast<int>(state.range(1));
  ParameterSet layout;
  const nn::Conv2d conv(layout, "c", {ch, ch, 3, 3, 1, 1, nn::Padding::same(3, 1, nn::PadMode::zero)});
  const Tensor x = random_tensor(1, ch, size, size, 1);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(layout, x, nullptr));
  state.SetItemsProcessed(state.iterations() * 2LL * ch * ch * 9 * size * size);
}
BENCHMARK(BM_ConvForward)->Args({16, 64})->Args({64, 64})->Args({64, 128});

void BM_ConvBackward(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  const int size = static_cast<int>(state.range(1));
  ParameterSet layout;
  const nn::Conv2d conv(layout, "c", {ch, ch, 3, 3, 1, 1, nn::Padding::same(3, 1, nn::PadMode::zero)});
  nn::LayerCache cache;
  const Tensor y = conv.forward(layout, random_tensor(1, ch, size, size, 1), &cache);
  const Tensor g = random_tensor(1, ch, size, size, 2);
  ParameterSet grads = layout.zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(layout, cache, g, &grads));
}
BENCHMARK(BM_ConvBackward)->Args({16, 64})->Args({64, 64});

void BM_GeneratorForward(benchmark::State& state) {
  GeneratorSpec spec;
  spec.base_filters = static_cast<int>(state.range(0));
  const int size = static_cast<int>(state.range(1));
  const Generator g(spec);
  const ParameterSet params = g.initialize(1);
  const Tensor x = random_tensor(1, 3, size, size, 3);
  const Tensor m(1, 1, size, size, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(g.forward(params, x, m));
}
BENCHMARK(BM_GeneratorForward)->Args({16, 64})->Args({64, 64})->Unit(benchmark::kMillisecond);

void BM_GeneratorTrainingStep(benchmark::State& state) {
  FeatureExtractorSpec fs;
  fs.topology = FeatureExtractorSpec::parse_topology("16,M,32");
  const FeatureExtractor fx(fs);
  TrainConfig c;
  c.lr_critic = 1e-4;
  c.image_size = 64;
  c.generator.base_filters = 16;
  c.generator.encoder_depth = 3;
  c.critic.depth = 3;
  c.critic.base_filters = 16;
  std::vector<Image> imgs;
  std::vector<BinaryMask> masks;
  Rng rng(4);
  for (int i = 0; i < c.batch_size; ++i) {
    Image img(64, 64, ValueRange::model);
    for (auto& v : img.values()) v = static_cast<float>(rng.uniform(-1, 1));
    imgs.push_back(img);
    BinaryMask m(64, 64, 1);
    for (int y = 20; y < 40; ++y) m.set(y, 30, false);
    masks.push_back(m);
  }
  const Trainer trainer(c, fx, imgs, masks);
  TrainState s = trainer.initial_state();
  const Batch batch = make_batch(imgs, masks);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.generator_step(s, batch));
}
BENCHMARK(BM_GeneratorTrainingStep)->Unit(benchmark::kMillisecond);

void BM_StrokeMask(benchmark::State& state) {
  StrokeSpec spec;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_stroke_mask(spec, seed++));
}
BENCHMARK(BM_StrokeMask);

void BM_Ssim(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Image a = random_8bit(size, 5), b = random_8bit(size, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256);

void BM_FrechetDistance(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(7);
  Embeddings a{200, dim, std::vector<double>(200 * static_cast<std::size_t>(dim))};
  Embeddings b = a;
  for (auto& v : a.values) v = rng.normal();
  for (auto& v : b.values) v = rng.normal() + 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(a, b));
}
BENCHMARK(BM_FrechetDistance)->Arg(128);

}  // namespace
