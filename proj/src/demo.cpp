#include "fesf/demo.hpp"

#include <fstream>

#include "fesf/error.hpp"
#include "fesf/image_io.hpp"
#include "fesf/toy_data.hpp"

namespace fesf::demo {
namespace fs = std::filesystem;

DemoResult run_demo(const DemoOptions& options) {
  options.params.validate("hiding");
  options.params_prime.validate("refine");
  const fs::path out = options.output_dir;
  fs::create_directories(out);
  const Shape shape{3, options.image_size, options.image_size};

  toy::write_class_dataset(out / "dataset", shape, options.per_class, options.seed);
  const Image host = toy::host_image(shape, options.seed + 7);
  io::write_png(out / "host_source.png", host);

  pipeline::DatasetSpec spec;
  spec.root = out / "dataset";
  spec.height = spec.width = options.image_size;
  spec.split_seed = options.seed;
  spec.split_mode = pipeline::SplitMode::exact;
  const auto dataset = pipeline::ingest(spec);

  const Image stored_host = io::read_png_as(out / "host_source.png", shape);
  std::vector<Image> synthetics;
  for (const auto& item : dataset.items) {
    if (item.split == Split::train) synthetics.push_back(ihm::hide(item.image, stored_host, options.params));
  }
  iqem::TrainConfig train = options.enhancer;
  train.seed = options.seed;
  train.patch_size = std::min(train.patch_size, options.image_size);
  const auto model = iqem::train_enhancer(synthetics, stored_host, train);
  iqem::save_model(model, out / "enhancer.bin");

  pipeline::GenerateOptions gen;
  gen.params = options.params;
  gen.params_prime = options.params_prime;
  gen.output_dir = out;
  gen.dataset_label = "demo";
  gen.seed = options.seed;
  gen.model = &model;
  gen.enhancer_note = "trained-per-run";

  DemoResult result;
  result.generation = pipeline::generate(dataset, stored_host, gen);
  const auto& manifest = result.generation.manifest;

  metrics::EvaluateOptions eval;
  eval.dataset_label = "demo";
  result.report = metrics::evaluate_pairs(manifest, pipeline::manifest_loader(manifest.shape), eval);
  {
    std::ofstream txt(out / "report.txt");
    metrics::write_report_table(result.report, txt);
    std::ofstream csv(out / "report.csv");
    metrics::write_report_records(result.report, csv);
  }

  for (auto source : {pipeline::Source::plaintext, pipeline::Source::surrogate, pipeline::Source::refined}) {
    result.utility.push_back(pipeline::utility_check(manifest, {.source = source, .seed = options.seed}));
  }
  result.utility.push_back(pipeline::utility_check(
      manifest, {.source = pipeline::Source::surrogate, .shuffle_labels = true, .seed = options.seed}));
  {
    std::ofstream txt(out / "utility.txt");
    pipeline::write_utility_table(result.utility, txt);
    std::ofstream csv(out / "utility.csv");
    pipeline::write_utility_records(result.utility, csv);
  }
  return result;
}

}  // namespace fesf::demo
