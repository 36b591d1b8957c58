#include "rmnet/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rmnet/errors.hpp"

namespace rmnet {
namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(s);
  return v;
}

// Reads typed keys from one section, remembering which keys were consumed
// and collecting conversion errors.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name, std::vector<std::string>& errors)
      : tree_(tree), name_(std::move(name)), errors_(errors) {}

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    const auto raw = text(key);
    if (!raw) return;
    try {
      out = convert<T>(*raw);
    } catch (const std::exception&) {
      errors_.push_back("[" + name_ + "] " + key + ": cannot parse '" + *raw + "'");
    }
  }

  std::optional<std::string> text(const char* key) {
    known_.insert(key);
    if (!tree_) return std::nullopt;
    const auto child = tree_->get_child_optional(key);
    if (!child) return std::nullopt;
    return trim(child->data());
  }

  void check_unknown() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_) {
      if (!known_.count(k)) errors_.push_back("[" + name_ + "] unknown key '" + k + "'");
    }
  }

 private:
  template <typename T>
  static T convert(const std::string& s) {
    if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
      if (s == "false" || s == "0" || s == "no" || s == "off") return false;
      throw std::invalid_argument(s);
    } else if constexpr (std::is_same_v<T, std::string>) {
      return s;
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
      return std::filesystem::path(s);
    } else if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(to_double(s));
    } else if constexpr (std::is_unsigned_v<T>) {
      std::size_t pos = 0;
      if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
      const auto v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return static_cast<T>(v);
    } else {
      std::size_t pos = 0;
      const auto v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return static_cast<T>(v);
    }
  }

  const pt::ptree* tree_;
  std::string name_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

[[noreturn]] void throw_errors(const std::string& header, const std::vector<std::string>& errors) {
  std::string msg = header;
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

template <typename F>
void check(std::vector<std::string>& errors, const char* what, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    errors.push_back(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::vector<HoleRatioBucket> parse_buckets(const std::string& text) {
  std::vector<HoleRatioBucket> out;
  for (const auto& item : split_commas(text)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) throw ConfigError("bucket '" + item + "' is not lo-hi");
    HoleRatioBucket b;
    try {
      b.lo = to_double(trim(item.substr(0, dash)));
      b.hi = to_double(trim(item.substr(dash + 1)));
    } catch (const std::exception&) {
      throw ConfigError("bucket '" + item + "' is not lo-hi");
    }
    b.validate();
    out.push_back(b);
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_commas(text)) {
    try {
      out.push_back(to_double(item));
    } catch (const std::exception&) {
      throw ConfigError("'" + item + "' is not a number");
    }
  }
  return out;
}

void RunConfig::set_seed(std::uint64_t root) {
  seed = root;
  train.seed = derive_seed(root, "train");
  masks.seed = derive_seed(root, "masks");
  if (!extractor_seed_set) extractor.seed = derive_seed(root, "extractor");
  if (!embedder_seed_set) embedder.seed = derive_seed(root, "embedder");
}

RunConfig parse_run_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  static const std::set<std::string> kSections{"run",    "dataset",   "training", "generator",
                                               "critic", "masks",     "extractor", "embedder",
                                               "eval",   "ablate"};
  std::vector<std::string> errors;
  for (const auto& [name, sub] : tree) {
    if (!kSections.count(name)) {
      errors.push_back(sub.empty() ? "key '" + name + "' outside any section"
                                   : "unknown section [" + name + "]");
    }
  }
  auto section = [&](const char* name) {
    const auto child = tree.get_child_optional(name);
    return Section(child ? &*child : nullptr, name, errors);
  };

  RunConfig cfg;
  cfg.source_text = text;

  auto run = section("run");
  run.get("seed", cfg.seed);
  run.get("out", cfg.out);
  run.check_unknown();

  auto ds = section("dataset");
  ds.get("root", cfg.dataset.root);
  ds.get("image_size", cfg.dataset.image_size);
  ds.get("train_fraction", cfg.dataset.train_fraction);
  if (auto v = ds.text("train_manifest")) cfg.dataset.train_manifest = *v;
  if (auto v = ds.text("test_manifest")) cfg.dataset.test_manifest = *v;
  ds.check_unknown();

  auto& t = cfg.train;
  auto tr = section("training");
  tr.get("lr_generator", t.lr_generator);
  tr.get("lr_critic", t.lr_critic);
  tr.get("adam_beta1", t.adam_beta1);
  tr.get("adam_beta2", t.adam_beta2);
  tr.get("adam_epsilon", t.adam_epsilon);
  tr.get("batch_size", t.batch_size);
  tr.get("epochs", t.epochs);
  tr.get("n_critic", t.n_critic);
  tr.get("clip_c", t.clip_c);
  tr.get("lambda", t.lambda);
  tr.get("adv_weight", t.adv_weight);
  tr.get("checkpoint_every", t.checkpoint_every);
  tr.get("max_generator_steps", t.max_generator_steps);
  tr.get("fixed_masks", t.fixed_masks);
  tr.check_unknown();
  t.image_size = cfg.dataset.image_size;

  auto gen = section("generator");
  gen.get("base_filters", t.generator.base_filters);
  gen.get("encoder_depth", t.generator.encoder_depth);
  gen.get("kernel", t.generator.kernel);
  gen.get("dilation", t.generator.dilation);
  gen.get("leaky_slope", t.generator.leaky_slope);
  gen.get("double_width", t.generator.double_width);
  gen.get("max_filters", t.generator.max_filters);
  gen.check_unknown();

  auto cr = section("critic");
  cr.get("depth", t.critic.depth);
  cr.get("base_filters", t.critic.base_filters);
  cr.get("double_width", t.critic.double_width);
  cr.get("max_filters", t.critic.max_filters);
  cr.get("leaky_slope", t.critic.leaky_slope);
  cr.check_unknown();

  auto& m = cfg.masks;
  auto mk = section("masks");
  if (auto v = mk.text("mode")) {
    if (*v == "synthesize") {
      m.mode = MaskSourceMode::synthesize;
    } else if (*v == "directory") {
      m.mode = MaskSourceMode::load_directory;
    } else {
      errors.push_back("[masks] mode must be synthesize or directory, got '" + *v + "'");
    }
  }
  mk.get("directory", m.directory);
  mk.get("threshold", m.binarize_threshold);
  mk.get("strokes_are_holes", m.strokes_are_holes);
  mk.get("min_strokes", m.min_strokes);
  mk.get("max_strokes", m.max_strokes);
  mk.get("min_vertices", m.strokes.min_vertices);
  mk.get("max_vertices", m.strokes.max_vertices);
  mk.get("min_thickness", m.strokes.min_thickness);
  mk.get("max_thickness", m.strokes.max_thickness);
  mk.get("max_turn", m.strokes.max_turn);
  mk.get("min_segment", m.strokes.min_segment);
  mk.get("max_segment", m.strokes.max_segment);
  mk.check_unknown();
  m.target_height = m.target_width = cfg.dataset.image_size;
  m.strokes.height = m.strokes.width = cfg.dataset.image_size;

  auto ex = section("extractor");
  if (auto v = ex.text("source")) {
    if (*v == "seeded_random") {
      cfg.extractor.source = WeightsSource::seeded_random;
    } else if (*v == "checkpoint") {
      cfg.extractor.source = WeightsSource::pretrained_checkpoint;
    } else {
      errors.push_back("[extractor] source must be seeded_random or checkpoint, got '" + *v + "'");
    }
  }
  if (ex.text("seed")) cfg.extractor_seed_set = true;
  ex.get("seed", cfg.extractor.seed);
  ex.get("checkpoint", cfg.extractor.checkpoint);
  if (auto v = ex.text("topology")) {
    check(errors, "[extractor] topology",
          [&] { cfg.extractor.topology = FeatureExtractorSpec::parse_topology(*v); });
  }
  ex.check_unknown();

  auto em = section("embedder");
  if (auto v = em.text("source")) {
    if (*v == "seeded_small") {
      cfg.embedder.source = EmbedderSource::seeded_small;
    } else if (*v == "checkpoint") {
      cfg.embedder.source = EmbedderSource::checkpoint;
    } else {
      errors.push_back("[embedder] source must be seeded_small or checkpoint, got '" + *v + "'");
    }
  }
  if (em.text("seed")) cfg.embedder_seed_set = true;
  em.get("seed", cfg.embedder.seed);
  em.get("checkpoint", cfg.embedder.checkpoint);
  if (auto v = em.text("topology")) {
    check(errors, "[embedder] topology",
          [&] { cfg.embedder.topology = FeatureExtractorSpec::parse_topology(*v); });
  }
  em.check_unknown();

  auto ev = section("eval");
  if (auto v = ev.text("buckets")) {
    check(errors, "[eval] buckets", [&] { cfg.eval.buckets = parse_buckets(*v); });
  }
  ev.get("max_tries", cfg.eval.max_tries);
  ev.get("grid_limit", cfg.eval.grid_limit);
  ev.check_unknown();

  auto ab = section("ablate");
  if (auto v = ab.text("lambdas")) {
    check(errors, "[ablate] lambdas", [&] { cfg.ablate_lambdas = parse_number_list(*v); });
  }
  ab.check_unknown();

  if (!errors.empty()) throw_errors("invalid config:", errors);
  cfg.set_seed(cfg.seed);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::filesystem::path resolve_cached(const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  if (const char* dir = std::getenv(kCacheDirEnv); dir && *dir) return std::filesystem::path(dir) / p;
  return p;
}

namespace {

void validate_common(const RunConfig& cfg, std::vector<std::string>& errors) {
  namespace fs = std::filesystem;
  if (cfg.out.empty()) errors.push_back("[run] out: output directory is required");
  if (cfg.dataset.root.empty()) {
    errors.push_back("[dataset] root is required");
  } else if (!fs::is_directory(cfg.dataset.root)) {
    errors.push_back("[dataset] root does not exist: " + cfg.dataset.root.string());
  }
  if (cfg.dataset.image_size < 1) errors.push_back("[dataset] image_size must be positive");
  if (!(cfg.dataset.train_fraction >= 0.0 && cfg.dataset.train_fraction <= 1.0)) {
    errors.push_back("[dataset] train_fraction must lie in [0, 1]");
  }
  if (cfg.dataset.train_manifest.has_value() != cfg.dataset.test_manifest.has_value()) {
    errors.push_back("[dataset] train_manifest and test_manifest go together");
  }
  for (const auto& mp : {cfg.dataset.train_manifest, cfg.dataset.test_manifest}) {
    if (mp && !fs::is_regular_file(*mp)) errors.push_back("[dataset] manifest missing: " + mp->string());
  }
  check(errors, "[masks]", [&] { cfg.masks.validate(); });
  if (cfg.masks.mode == MaskSourceMode::load_directory && !fs::is_directory(cfg.masks.directory)) {
    errors.push_back("[masks] directory does not exist: " + cfg.masks.directory.string());
  }
  check(errors, "[embedder]", [&] { cfg.embedder.validate(); });
  if (cfg.embedder.source == EmbedderSource::checkpoint &&
      !fs::exists(resolve_cached(cfg.embedder.checkpoint))) {
    errors.push_back("[embedder] checkpoint not found: " +
                     resolve_cached(cfg.embedder.checkpoint).string());
  }
  if (cfg.eval.max_tries < 1) errors.push_back("[eval] max_tries must be positive");
  if (cfg.eval.grid_limit < 0) errors.push_back("[eval] grid_limit must be non-negative");
}

}  // namespace

void validate_for_training(const RunConfig& cfg) {
  std::vector<std::string> errors;
  validate_common(cfg, errors);
  check(errors, "[training]", [&] { cfg.train.validate(); });
  check(errors, "[extractor]", [&] { cfg.extractor.validate(); });
  if (cfg.extractor.source == WeightsSource::pretrained_checkpoint &&
      !std::filesystem::exists(resolve_cached(cfg.extractor.checkpoint))) {
    errors.push_back("[extractor] checkpoint not found: " +
                     resolve_cached(cfg.extractor.checkpoint).string());
  }
  for (double l : cfg.ablate_lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) errors.push_back("[ablate] lambda outside [0, 1]");
  }
  if (!errors.empty()) throw_errors("config validation failed:", errors);
}

void validate_for_eval(const RunConfig& cfg) {
  std::vector<std::string> errors;
  validate_common(cfg, errors);
  if (!errors.empty()) throw_errors("config validation failed:", errors);
}

}  // namespace rmnet
