#pragma once

#include <nlohmann/json.hpp>

#include "rmnet/mask_synthesis.hpp"
#include "rmnet/model.hpp"
#include "rmnet/training.hpp"

// JSON forms of the spec/config structs, as stored in checkpoint manifests
// and run directories. Missing keys keep their defaults.
namespace rmnet {

void to_json(nlohmann::json& j, const GeneratorSpec& s);
void from_json(const nlohmann::json& j, GeneratorSpec& s);
void to_json(nlohmann::json& j, const CriticSpec& s);
void from_json(const nlohmann::json& j, CriticSpec& s);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const StepRecord& r);
void from_json(const nlohmann::json& j, StepRecord& r);
void to_json(nlohmann::json& j, const StrokeSpec& s);
void from_json(const nlohmann::json& j, StrokeSpec& s);
void to_json(nlohmann::json& j, const MaskSourceConfig& c);
void from_json(const nlohmann::json& j, MaskSourceConfig& c);

}  // namespace rmnet
