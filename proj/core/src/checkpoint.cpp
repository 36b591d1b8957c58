#include <nlohmann/json.hpp>

#include "rmnet/errors.hpp"
#include "rmnet/param_store.hpp"
#include "rmnet/serialization.hpp"
#include "rmnet/training.hpp"

namespace rmnet {
namespace {

using nlohmann::json;

constexpr const char* kTrainingKind = "training";
constexpr const char* kGeneratorKind = "generator";

const ParameterSet& group(const LoadedCheckpoint& ck, const std::string& name) {
  const auto it = ck.groups.find(name);
  if (it == ck.groups.end()) throw CorruptCheckpointError("checkpoint lacks tensor group " + name);
  return it->second;
}

}  // namespace

void save_training_checkpoint(const std::filesystem::path& dir, const TrainState& state,
                              const TrainConfig& cfg, const std::string& extractor_identity) {
  json meta;
  meta["kind"] = kTrainingKind;
  meta["config"] = cfg;
  meta["extractor_identity"] = extractor_identity;
  meta["generator_steps"] = state.generator_steps;
  meta["critic_steps"] = state.critic_steps;
  meta["epoch"] = state.epoch;
  meta["batch_cursor"] = state.batch_cursor;
  meta["epoch_order"] = state.epoch_order;
  meta["rng_state"] = state.rng.save_state();
  meta["generator_adam_steps"] = state.generator_opt.steps();
  meta["critic_adam_steps"] = state.critic_opt.steps();
  meta["history"] = state.history;
  save_checkpoint_dir(dir, meta,
                      {{"generator", &state.generator},
                       {"critic", &state.critic},
                       {"generator_adam_m", &state.generator_opt.first_moment()},
                       {"generator_adam_v", &state.generator_opt.second_moment()},
                       {"critic_adam_m", &state.critic_opt.first_moment()},
                       {"critic_adam_v", &state.critic_opt.second_moment()}});
}

LoadedTraining load_training_checkpoint(const std::filesystem::path& dir) {
  LoadedCheckpoint ck = load_checkpoint_dir(dir);
  LoadedTraining out;
  try {
    if (ck.meta.value("kind", std::string()) != kTrainingKind) {
      throw CorruptCheckpointError(dir.string() + " is not a training checkpoint");
    }
    out.config = ck.meta.at("config").get<TrainConfig>();
    out.extractor_identity = ck.meta.at("extractor_identity").get<std::string>();
    auto& s = out.state;
    s.generator_steps = ck.meta.at("generator_steps").get<std::int64_t>();
    s.critic_steps = ck.meta.at("critic_steps").get<std::int64_t>();
    s.epoch = ck.meta.at("epoch").get<int>();
    s.batch_cursor = ck.meta.at("batch_cursor").get<std::size_t>();
    s.epoch_order = ck.meta.at("epoch_order").get<std::vector<int>>();
    s.rng.load_state(ck.meta.at("rng_state").get<std::string>());
    s.history = ck.meta.at("history").get<std::vector<StepRecord>>();
    s.generator = group(ck, "generator");
    s.critic = group(ck, "critic");
    const auto& c = out.config;
    s.generator_opt = Adam(AdamConfig{c.lr_generator, c.adam_beta1, c.adam_beta2, c.adam_epsilon},
                           s.generator);
    s.generator_opt.restore(ck.meta.at("generator_adam_steps").get<std::int64_t>(),
                            group(ck, "generator_adam_m"), group(ck, "generator_adam_v"));
    s.critic_opt =
        Adam(AdamConfig{c.lr_critic, c.adam_beta1, c.adam_beta2, c.adam_epsilon}, s.critic);
    s.critic_opt.restore(ck.meta.at("critic_adam_steps").get<std::int64_t>(),
                         group(ck, "critic_adam_m"), group(ck, "critic_adam_v"));
    Generator(c.generator).check_params(s.generator);
    Critic(c.critic).check_params(s.critic);
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("malformed training checkpoint metadata: " + std::string(e.what()));
  } catch (const ShapeError& e) {
    throw CorruptCheckpointError("checkpoint tensors do not match its config: " +
                                 std::string(e.what()));
  }
  return out;
}

void save_generator_checkpoint(const std::filesystem::path& dir, const GeneratorSpec& spec,
                               const ParameterSet& params, std::uint64_t seed,
                               std::int64_t generator_steps) {
  Generator(spec).check_params(params);
  json meta;
  meta["kind"] = kGeneratorKind;
  meta["generator_spec"] = spec;
  meta["seed"] = seed;
  meta["generator_steps"] = generator_steps;
  save_checkpoint_dir(dir, meta, {{"generator", &params}});
}

LoadedGenerator load_generator_checkpoint(const std::filesystem::path& dir) {
  LoadedCheckpoint ck = load_checkpoint_dir(dir);
  LoadedGenerator out;
  try {
    const auto kind = ck.meta.value("kind", std::string());
    if (kind == kTrainingKind) {
      out.spec = ck.meta.at("config").at("generator").get<GeneratorSpec>();
    } else if (kind == kGeneratorKind) {
      out.spec = ck.meta.at("generator_spec").get<GeneratorSpec>();
    } else {
      throw CorruptCheckpointError(dir.string() + " does not carry a generator");
    }
    out.generator_steps = ck.meta.value("generator_steps", std::int64_t{0});
    out.params = group(ck, "generator");
    Generator(out.spec).check_params(out.params);
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("malformed generator checkpoint metadata: " + std::string(e.what()));
  } catch (const ShapeError& e) {
    throw CorruptCheckpointError("generator tensors do not match the stored spec: " +
                                 std::string(e.what()));
  }
  return out;
}

}  // namespace rmnet
