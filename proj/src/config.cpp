#include "fesf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fesf/error.hpp"
#include "json.hpp"

namespace fesf {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ValidationError("config: unknown key '" + where + "." + key + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <class T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key) && !obj.at(key).is_null()) target = obj.at(key).get<T>();
}

void read_hiding(const json& obj, const char* key, ihm::HidingParams& p) {
  if (!obj.contains(key)) return;
  const json& h = obj.at(key);
  reject_unknown(h, {"alpha", "beta"}, key);
  read(h, "alpha", p.alpha);
  read(h, "beta", p.beta);
}

}  // namespace

void RunConfig::validate() const {
  dataset.validate();
  hiding.validate("hiding");
  refine.validate("refine");
  iqem.validate();
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("config: invalid JSON: ") + ex.what());
  }
  RunConfig cfg;
  try {
    reject_unknown(root, {"dataset", "host", "hiding", "refine", "iqem", "output", "seed"}, "config");
    if (root.contains("dataset")) {
      const json& d = root.at("dataset");
      reject_unknown(d, {"root", "label_table", "label", "height", "width", "channels", "split_ratio", "split_seed",
                         "split_mode"},
                     "dataset");
      if (d.contains("root")) cfg.dataset.root = resolve(base, d.at("root").get<std::string>());
      if (d.contains("label_table") && !d.at("label_table").is_null()) {
        cfg.dataset.label_table = resolve(base, d.at("label_table").get<std::string>());
      }
      read(d, "label", cfg.dataset_label);
      read(d, "height", cfg.dataset.height);
      read(d, "width", cfg.dataset.width);
      read(d, "channels", cfg.dataset.channels);
      read(d, "split_seed", cfg.dataset.split_seed);
      if (d.contains("split_ratio")) {
        const auto ratio = d.at("split_ratio").get<std::vector<double>>();
        if (ratio.size() != 2) throw ValidationError("config: dataset.split_ratio must have two entries");
        cfg.dataset.train_ratio = ratio[0];
        cfg.dataset.test_ratio = ratio[1];
      }
      if (d.contains("split_mode")) {
        const auto mode = d.at("split_mode").get<std::string>();
        if (mode == "hashed") cfg.dataset.split_mode = pipeline::SplitMode::hashed;
        else if (mode == "exact") cfg.dataset.split_mode = pipeline::SplitMode::exact;
        else throw ValidationError("config: dataset.split_mode must be 'hashed' or 'exact'");
      }
    }
    if (root.contains("host") && !root.at("host").is_null()) cfg.host = resolve(base, root.at("host").get<std::string>());
    read_hiding(root, "hiding", cfg.hiding);
    read_hiding(root, "refine", cfg.refine);
    if (root.contains("iqem")) {
      const json& q = root.at("iqem");
      reject_unknown(q, {"enabled", "model", "epochs", "batch_size", "learning_rate", "content_weight", "seed",
                         "patch_size", "generator_hidden", "discriminator_hidden"},
                     "iqem");
      read(q, "enabled", cfg.train_enhancer);
      if (q.contains("model") && !q.at("model").is_null()) cfg.model = resolve(base, q.at("model").get<std::string>());
      read(q, "epochs", cfg.iqem.epochs);
      read(q, "batch_size", cfg.iqem.batch_size);
      read(q, "learning_rate", cfg.iqem.learning_rate);
      read(q, "content_weight", cfg.iqem.content_weight);
      read(q, "seed", cfg.iqem.seed);
      read(q, "patch_size", cfg.iqem.patch_size);
      read(q, "generator_hidden", cfg.iqem.generator_hidden);
      read(q, "discriminator_hidden", cfg.iqem.discriminator_hidden);
    }
    if (root.contains("output")) {
      const json& o = root.at("output");
      reject_unknown(o, {"root"}, "output");
      if (o.contains("root")) cfg.output_root = resolve(base, o.at("root").get<std::string>());
    }
    read(root, "seed", cfg.seed);
    // Section seeds follow the global seed unless given explicitly.
    if (!root.contains("dataset") || !root.at("dataset").contains("split_seed")) cfg.dataset.split_seed = cfg.seed;
    if (!root.contains("iqem") || !root.at("iqem").contains("seed")) cfg.iqem.seed = cfg.seed;
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("config: wrong value type: ") + ex.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void apply_environment(RunConfig& config) {
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') config.output_root = root;
}

}  // namespace fesf
