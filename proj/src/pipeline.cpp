#include "fesf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fesf/error.hpp"
#include "fesf/image_io.hpp"
#include "fesf/nn.hpp"

namespace fesf::pipeline {
namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool has_png_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::string artifact_name(const std::string& id) {
  fs::path p(id);
  p.replace_extension(".png");
  return p.generic_string();
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Every class directory is reported in `classes`, including empty ones.
std::vector<std::pair<std::string, std::string>> list_labelled_files(const DatasetSpec& spec,
                                                                     std::vector<std::string>& classes) {
  std::vector<std::pair<std::string, std::string>> files;  // (id, label)
  if (spec.label_table) {
    std::ifstream in(*spec.label_table);
    if (!in) throw IoError("cannot read label table " + spec.label_table->string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw ValidationError(spec.label_table->string() + ":" + std::to_string(line_no) + ": expected 'path,label'");
      }
      const std::string path = trim(line.substr(0, comma));
      const std::string label = trim(line.substr(comma + 1));
      if (line_no == 1 && path == "path" && label == "label") continue;
      if (path.empty() || label.empty()) {
        throw ValidationError(spec.label_table->string() + ":" + std::to_string(line_no) + ": empty path or label");
      }
      files.emplace_back(fs::path(path).generic_string(), label);
    }
  } else {
    for (const auto& dir : fs::directory_iterator(spec.root)) {
      if (!dir.is_directory()) continue;
      const std::string label = dir.path().filename().string();
      classes.push_back(label);
      for (const auto& f : fs::recursive_directory_iterator(dir.path())) {
        if (!f.is_regular_file() || !has_png_extension(f.path())) continue;
        files.emplace_back(fs::relative(f.path(), spec.root).generic_string(), label);
      }
    }
  }
  std::sort(files.begin(), files.end());
  const auto dup = std::adjacent_find(files.begin(), files.end(),
                                      [](const auto& a, const auto& b) { return a.first == b.first; });
  if (dup != files.end()) throw ValidationError("image '" + dup->first + "' has more than one label");
  return files;
}

}  // namespace

void DatasetSpec::validate() const {
  if (!(train_ratio > 0.0) || !(test_ratio > 0.0) || !std::isfinite(train_ratio) || !std::isfinite(test_ratio)) {
    throw ValidationError("split ratio components must be positive");
  }
  if (height == 0 || width == 0) throw ValidationError("resize target must be non-empty");
  if (channels != 1 && channels != 3) throw ValidationError("dataset channels must be 1 or 3");
}

double split_hash(const std::string& id, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return static_cast<double>(splitmix(h ^ splitmix(seed)) >> 11) * 0x1.0p-53;
}

Split assign_split(const std::string& id, std::uint64_t seed, double train_fraction) {
  return split_hash(id, seed) < train_fraction ? Split::train : Split::test;
}

Dataset ingest(const DatasetSpec& spec) {
  spec.validate();
  if (!fs::is_directory(spec.root)) throw IoError("dataset root " + spec.root.string() + " is not a directory");
  Dataset ds;
  ds.shape = {spec.channels, spec.height, spec.width};
  std::map<std::string, std::size_t> per_class;
  std::vector<std::string> classes;
  const auto files = list_labelled_files(spec, classes);
  for (const auto& label : classes) per_class.try_emplace(label, 0);
  for (const auto& [id, label] : files) {
    per_class.try_emplace(label, 0);
    DatasetItem item{id, spec.root / id, label, Split::train, {}};
    try {
      item.image = io::read_png_as(item.path, ds.shape);
    } catch (const IoError& ex) {
      ds.skipped.push_back(id + ": " + ex.what());
      continue;
    }
    ++per_class[label];
    ds.items.push_back(std::move(item));
  }
  if (per_class.empty()) throw ValidationError("dataset " + spec.root.string() + " contains no images");
  for (const auto& [label, count] : per_class) {
    if (count < 2) {
      throw ValidationError("class '" + label + "' has " + std::to_string(count) + " readable images; at least 2 required");
    }
  }

  const double fraction = spec.train_fraction();
  if (spec.split_mode == SplitMode::hashed) {
    for (auto& item : ds.items) item.split = assign_split(item.id, spec.split_seed, fraction);
  } else {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < ds.items.size(); ++i) ranked.emplace_back(split_hash(ds.items[i].id, spec.split_seed), i);
    std::sort(ranked.begin(), ranked.end());
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ranked.size())));
    for (std::size_t r = 0; r < ranked.size(); ++r) ds.items[ranked[r].second].split = r < n_train ? Split::train : Split::test;
  }
  return ds;
}

GenerateResult generate(const Dataset& dataset, const Image& host, const GenerateOptions& options) {
  options.params.validate("hiding params");
  options.params_prime.validate("refinement params");
  if (dataset.items.empty()) throw ValidationError("generate: dataset is empty");
  if (options.model && options.model->channels() != dataset.shape.channels) {
    throw ValidationError("generate: enhancer channel count does not match the dataset");
  }
  const fs::path out_dir = options.output_dir;
  fs::create_directories(out_dir);
  // Stale artifacts from an earlier run would not be in the new manifest.
  for (const char* sub : {"synthetic", "surrogate", "refined"}) fs::remove_all(out_dir / sub);
  const Image conformed_host = io::resize(io::convert_channels(host, dataset.shape.channels), dataset.shape.height,
                                          dataset.shape.width);
  io::write_png(out_dir / "host.png", conformed_host);

  GenerateResult result;
  auto& m = result.manifest;
  m.dataset_label = options.dataset_label;
  m.seed = options.seed;
  m.host_path = "host.png";
  m.shape = dataset.shape;
  m.enhancer = options.enhancer_note;
  m.base_dir = out_dir;

  const fs::path abs_out = fs::absolute(out_dir);
  for (const auto& item : dataset.items) {
    try {
      const Image synthetic = ihm::hide(item.image, conformed_host, options.params);
      const Image surrogate = options.model ? iqem::enhance(*options.model, synthetic) : synthetic;
      const Image refined = ihm::refine(surrogate, item.image, options.params_prime);

      ManifestEntry e;
      e.plaintext_id = item.id;
      e.plaintext_path = fs::proximate(fs::absolute(item.path), abs_out).generic_string();
      e.host_id = "host";
      const std::string name = artifact_name(item.id);
      e.synthetic_path = "synthetic/" + name;
      e.surrogate_path = "surrogate/" + name;
      e.refined_path = "refined/" + name;
      e.params = options.params;
      e.params_prime = options.params_prime;
      e.label = item.label;
      e.split = item.split;
      io::write_png(out_dir / e.synthetic_path, synthetic);
      io::write_png(out_dir / e.surrogate_path, surrogate);
      io::write_png(out_dir / e.refined_path, refined);
      m.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      result.failures.push_back({item.id, ex.what()});
    }
  }
  if (m.entries.empty()) throw ValidationError("generate: every image failed; first error: " + result.failures.front().message);
  result.manifest_path = out_dir / "manifest.jsonl";
  write_manifest(m, result.manifest_path);
  return result;
}

const char* to_string(Source s) {
  switch (s) {
    case Source::plaintext: return "plaintext";
    case Source::surrogate: return "surrogate";
    case Source::refined: return "refined";
  }
  return "?";
}

Source source_from_string(const std::string& s) {
  if (s == "plaintext") return Source::plaintext;
  if (s == "surrogate") return Source::surrogate;
  if (s == "refined") return Source::refined;
  throw ValidationError("unknown image source '" + s + "' (expected plaintext, surrogate or refined)");
}

Shape manifest_shape(const SurrogateManifest& manifest) {
  if (manifest.shape.size() == 0) throw ValidationError("manifest does not record an image shape");
  return manifest.shape;
}

metrics::ImageLoader manifest_loader(const Shape& shape) {
  return [shape](const fs::path& p) { return io::read_png_as(p, shape); };
}

ClassificationScores score_predictions(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                                       std::size_t classes) {
  if (truth.size() != predicted.size()) throw ValidationError("prediction count does not match label count");
  ClassificationScores s;
  s.count = truth.size();
  if (truth.empty()) return s;
  std::vector<double> tp(classes, 0.0), fp(classes, 0.0), fn(classes, 0.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == predicted[i]) {
      ++correct;
      tp[truth[i]] += 1.0;
    } else {
      fp[predicted[i]] += 1.0;
      fn[truth[i]] += 1.0;
    }
  }
  s.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (std::size_t k = 0; k < classes; ++k) {
    const double p = tp[k] + fp[k] > 0.0 ? tp[k] / (tp[k] + fp[k]) : 0.0;
    const double r = tp[k] + fn[k] > 0.0 ? tp[k] / (tp[k] + fn[k]) : 0.0;
    s.precision += p;
    s.recall += r;
    s.f1 += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  const double n = static_cast<double>(classes);
  s.precision /= n;
  s.recall /= n;
  s.f1 /= n;
  return s;
}

UtilityResult utility_check(const SurrogateManifest& manifest, const UtilityOptions& options) {
  if (options.feature_size == 0 || options.iterations == 0 || !(options.learning_rate > 0.0)) {
    throw ValidationError("utility: feature_size, iterations and learning_rate must be positive");
  }
  const auto classes = manifest.labels();
  if (classes.size() < 2) throw ValidationError("utility: manifest has a single class; at least two required");
  const Shape shape = manifest_shape(manifest);
  const auto load = manifest_loader(shape);

  std::vector<std::size_t> labels;
  for (const auto& e : manifest.entries) {
    labels.push_back(static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), e.label) - classes.begin()));
  }
  if (options.shuffle_labels) {
    nn::Rng rng(options.seed ^ 0x5eed5eedULL);
    rng.shuffle(labels);
  }

  const std::size_t fs_ = options.feature_size;
  const std::size_t dim = shape.channels * fs_ * fs_;
  std::vector<std::vector<double>> features;
  for (const auto& e : manifest.entries) {
    const std::string& rel = options.source == Source::plaintext  ? e.plaintext_path
                             : options.source == Source::surrogate ? e.surrogate_path
                                                                   : e.refined_path;
    const Image img = io::resize(load(manifest.resolve(rel)), fs_, fs_);
    features.emplace_back(img.data().begin(), img.data().end());
  }

  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    (manifest.entries[i].split == Split::train ? train_idx : test_idx).push_back(i);
  }
  if (train_idx.empty() || test_idx.empty()) throw ValidationError("utility: manifest needs both train and test entries");

  // Standardise with train-split statistics.
  std::vector<double> mean(dim, 0.0), scale(dim, 0.0);
  for (auto i : train_idx) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += features[i][d];
  }
  for (auto& v : mean) v /= static_cast<double>(train_idx.size());
  for (auto i : train_idx) {
    for (std::size_t d = 0; d < dim; ++d) scale[d] += (features[i][d] - mean[d]) * (features[i][d] - mean[d]);
  }
  for (auto& v : scale) v = 1.0 / std::sqrt(v / static_cast<double>(train_idx.size()) + 1e-12);
  for (auto& f : features) {
    for (std::size_t d = 0; d < dim; ++d) f[d] = (f[d] - mean[d]) * scale[d];
  }

  const nn::SoftmaxClassifier clf(dim, classes.size());
  std::vector<double> params(clf.param_count(), 0.0);
  std::vector<double> grad(params.size());
  const double weight = 1.0 / static_cast<double>(train_idx.size());
  for (std::size_t it = 0; it < options.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (auto i : train_idx) clf.loss_and_grad(features[i], labels[i], params, grad, weight);
    for (std::size_t k = 0; k < classes.size() * dim; ++k) grad[k] += options.l2 * params[k];
    nn::sgd_step(params, grad, options.learning_rate);
  }
  if (!nn::all_finite(params)) throw TrainingError("utility: classifier parameters diverged");

  auto evaluate = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> truth, pred;
    for (auto i : idx) {
      truth.push_back(labels[i]);
      pred.push_back(clf.predict(features[i], params));
    }
    return score_predictions(truth, pred, classes.size());
  };

  UtilityResult r;
  r.classifier = "softmax-regression/" + std::to_string(fs_) + "x" + std::to_string(fs_) + "px";
  r.trained_on = options.source;
  r.classes = classes;
  r.train = evaluate(train_idx);
  r.test = evaluate(test_idx);
  r.shuffled_labels = options.shuffle_labels;
  return r;
}

namespace {
std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}
}  // namespace

void write_utility_table(const std::vector<UtilityResult>& results, std::ostream& out) {
  char line[200];
  std::snprintf(line, sizeof line, "%-12s %-6s %-8s %-8s %-8s %-8s %-6s\n", "trained on", "split", "Acc", "P", "R", "F1",
                "n");
  out << line;
  for (const auto& r : results) {
    const std::string name = std::string(to_string(r.trained_on)) + (r.shuffled_labels ? "*" : "");
    for (const auto* split : {"train", "test"}) {
      const auto& s = std::string(split) == "train" ? r.train : r.test;
      std::snprintf(line, sizeof line, "%-12s %-6s %-8s %-8s %-8s %-8s %-6zu\n", name.c_str(), split,
                    fmt4(s.accuracy).c_str(), fmt4(s.precision).c_str(), fmt4(s.recall).c_str(), fmt4(s.f1).c_str(),
                    s.count);
      out << line;
    }
  }
  if (!results.empty()) out << "classifier: " << results.front().classifier << "; * = labels shuffled (control)\n";
}

void write_utility_records(const std::vector<UtilityResult>& results, std::ostream& out) {
  out << "source,shuffled,split,metric,value,count\n";
  for (const auto& r : results) {
    for (const auto* split : {"train", "test"}) {
      const auto& s = std::string(split) == "train" ? r.train : r.test;
      const std::pair<const char*, double> rows[] = {
          {"accuracy", s.accuracy}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
      for (const auto& [metric, value] : rows) {
        out << to_string(r.trained_on) << ',' << (r.shuffled_labels ? 1 : 0) << ',' << split << ',' << metric << ','
            << fmt4(value) << ',' << s.count << '\n';
      }
    }
  }
}

}  // namespace fesf::pipeline
