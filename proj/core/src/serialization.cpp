#include "rmnet/serialization.hpp"

#include <cmath>

#include "rmnet/errors.hpp"

namespace rmnet {
namespace {

using nlohmann::json;

template <typename T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double null_to_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nan("");
  return j.at(key).get<double>();
}

}  // namespace

void to_json(json& j, const GeneratorSpec& s) {
  j = json{{"input_channels", s.input_channels}, {"base_filters", s.base_filters},
           {"kernel", s.kernel},                 {"dilation", s.dilation},
           {"leaky_slope", s.leaky_slope},       {"encoder_depth", s.encoder_depth},
           {"decoder_kernel", s.decoder_kernel}, {"output_kernel", s.output_kernel},
           {"double_width", s.double_width},     {"max_filters", s.max_filters}};
}

void from_json(const json& j, GeneratorSpec& s) {
  get_opt(j, "input_channels", s.input_channels);
  get_opt(j, "base_filters", s.base_filters);
  get_opt(j, "kernel", s.kernel);
  get_opt(j, "dilation", s.dilation);
  get_opt(j, "leaky_slope", s.leaky_slope);
  get_opt(j, "encoder_depth", s.encoder_depth);
  get_opt(j, "decoder_kernel", s.decoder_kernel);
  get_opt(j, "output_kernel", s.output_kernel);
  get_opt(j, "double_width", s.double_width);
  get_opt(j, "max_filters", s.max_filters);
}

void to_json(json& j, const CriticSpec& s) {
  j = json{{"input_channels", s.input_channels}, {"depth", s.depth},
           {"base_filters", s.base_filters},     {"double_width", s.double_width},
           {"max_filters", s.max_filters},       {"kernel", s.kernel},
           {"leaky_slope", s.leaky_slope}};
}

void from_json(const json& j, CriticSpec& s) {
  get_opt(j, "input_channels", s.input_channels);
  get_opt(j, "depth", s.depth);
  get_opt(j, "base_filters", s.base_filters);
  get_opt(j, "double_width", s.double_width);
  get_opt(j, "max_filters", s.max_filters);
  get_opt(j, "kernel", s.kernel);
  get_opt(j, "leaky_slope", s.leaky_slope);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"lr_generator", c.lr_generator},
           {"lr_critic", c.lr_critic},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_epsilon", c.adam_epsilon},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"n_critic", c.n_critic},
           {"clip_c", c.clip_c},
           {"lambda", c.lambda},
           {"adv_weight", c.adv_weight},
           {"seed", c.seed},
           {"image_size", c.image_size},
           {"checkpoint_every", c.checkpoint_every},
           {"max_generator_steps", c.max_generator_steps},
           {"fixed_masks", c.fixed_masks},
           {"generator", c.generator},
           {"critic", c.critic}};
}

void from_json(const json& j, TrainConfig& c) {
  get_opt(j, "lr_generator", c.lr_generator);
  get_opt(j, "lr_critic", c.lr_critic);
  get_opt(j, "adam_beta1", c.adam_beta1);
  get_opt(j, "adam_beta2", c.adam_beta2);
  get_opt(j, "adam_epsilon", c.adam_epsilon);
  get_opt(j, "batch_size", c.batch_size);
  get_opt(j, "epochs", c.epochs);
  get_opt(j, "n_critic", c.n_critic);
  get_opt(j, "clip_c", c.clip_c);
  get_opt(j, "lambda", c.lambda);
  get_opt(j, "adv_weight", c.adv_weight);
  get_opt(j, "seed", c.seed);
  get_opt(j, "image_size", c.image_size);
  get_opt(j, "checkpoint_every", c.checkpoint_every);
  get_opt(j, "max_generator_steps", c.max_generator_steps);
  get_opt(j, "fixed_masks", c.fixed_masks);
  get_opt(j, "generator", c.generator);
  get_opt(j, "critic", c.critic);
}

void to_json(json& j, const StepRecord& r) {
  j = json{{"index", r.index},
           {"kind", to_string(r.kind)},
           {"epoch", r.epoch},
           {"l_p", finite_or_null(r.l_p)},
           {"l_rm", finite_or_null(r.l_rm)},
           {"l_g", finite_or_null(r.l_g)},
           {"l_w", finite_or_null(r.l_w)},
           {"wall_seconds", r.wall_seconds}};
}

void from_json(const json& j, StepRecord& r) {
  r.index = j.at("index").get<std::int64_t>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "critic") {
    r.kind = StepKind::critic;
  } else if (kind == "generator") {
    r.kind = StepKind::generator;
  } else {
    throw json::other_error::create(501, "unknown step kind " + kind, &j);
  }
  r.epoch = j.at("epoch").get<int>();
  r.l_p = null_to_nan(j, "l_p");
  r.l_rm = null_to_nan(j, "l_rm");
  r.l_g = null_to_nan(j, "l_g");
  r.l_w = null_to_nan(j, "l_w");
  r.wall_seconds = j.at("wall_seconds").get<double>();
}

void to_json(json& j, const StrokeSpec& s) {
  j = json{{"num_strokes", s.num_strokes},     {"min_vertices", s.min_vertices},
           {"max_vertices", s.max_vertices},   {"min_thickness", s.min_thickness},
           {"max_thickness", s.max_thickness}, {"height", s.height},
           {"width", s.width},                 {"max_turn", s.max_turn},
           {"min_segment", s.min_segment},     {"max_segment", s.max_segment}};
}

void from_json(const json& j, StrokeSpec& s) {
  get_opt(j, "num_strokes", s.num_strokes);
  get_opt(j, "min_vertices", s.min_vertices);
  get_opt(j, "max_vertices", s.max_vertices);
  get_opt(j, "min_thickness", s.min_thickness);
  get_opt(j, "max_thickness", s.max_thickness);
  get_opt(j, "height", s.height);
  get_opt(j, "width", s.width);
  get_opt(j, "max_turn", s.max_turn);
  get_opt(j, "min_segment", s.min_segment);
  get_opt(j, "max_segment", s.max_segment);
}

void to_json(json& j, const MaskSourceConfig& c) {
  j = json{{"mode", c.mode == MaskSourceMode::synthesize ? "synthesize" : "load_directory"},
           {"directory", c.directory.string()},
           {"target_height", c.target_height},
           {"target_width", c.target_width},
           {"binarize_threshold", c.binarize_threshold},
           {"strokes_are_holes", c.strokes_are_holes},
           {"seed", c.seed},
           {"strokes", c.strokes},
           {"min_strokes", c.min_strokes},
           {"max_strokes", c.max_strokes}};
}

void from_json(const json& j, MaskSourceConfig& c) {
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    c.mode = m == "load_directory" ? MaskSourceMode::load_directory : MaskSourceMode::synthesize;
  }
  if (j.contains("directory")) c.directory = j.at("directory").get<std::string>();
  get_opt(j, "target_height", c.target_height);
  get_opt(j, "target_width", c.target_width);
  get_opt(j, "binarize_threshold", c.binarize_threshold);
  get_opt(j, "strokes_are_holes", c.strokes_are_holes);
  get_opt(j, "seed", c.seed);
  get_opt(j, "strokes", c.strokes);
  get_opt(j, "min_strokes", c.min_strokes);
  get_opt(j, "max_strokes", c.max_strokes);
}

}  // namespace rmnet
