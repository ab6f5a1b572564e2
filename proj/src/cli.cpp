#include "fesf/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "fesf/config.hpp"
#include "fesf/demo.hpp"
#include "fesf/error.hpp"
#include "fesf/image_io.hpp"
#include "fesf/metrics.hpp"
#include "fesf/pipeline.hpp"

namespace fesf::cli {
namespace fs = std::filesystem;

namespace {

// Flags shared by every subcommand.
struct Common {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* sub) {
    sub->add_option("-c,--config", config, "JSON config file");
    sub->add_option("-o,--output", output, "Output root (overrides config and FESF_OUTPUT_ROOT)");
    sub->add_option("--seed", seed, "Global seed");
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    apply_environment(cfg);
    if (!output.empty()) cfg.output_root = output;
    if (seed) cfg.seed = cfg.dataset.split_seed = cfg.iqem.seed = *seed;
    return cfg;
  }
};

struct ParamFlags {
  std::optional<double> alpha, beta, alpha_prime, beta_prime;

  void attach_hiding(CLI::App* sub) {
    sub->add_option("--alpha", alpha, "Mask half-extent fraction, [0, 0.5]");
    sub->add_option("--beta", beta, "Plaintext amplitude share, [0, 1]");
  }
  void attach_refine(CLI::App* sub) {
    sub->add_option("--alpha-prime", alpha_prime, "Refinement mask fraction, [0, 0.5]");
    sub->add_option("--beta-prime", beta_prime, "Refinement amplitude share, [0, 1]");
  }
  void apply(RunConfig& cfg) const {
    if (alpha) cfg.hiding.alpha = *alpha;
    if (beta) cfg.hiding.beta = *beta;
    if (alpha_prime) cfg.refine.alpha = *alpha_prime;
    if (beta_prime) cfg.refine.beta = *beta_prime;
    cfg.hiding.validate("hiding");
    cfg.refine.validate("refine");
  }
};

struct TrainFlags {
  std::optional<std::size_t> epochs, batch_size, patch_size;
  std::optional<double> learning_rate, content_weight;

  void attach(CLI::App* sub) {
    sub->add_option("--epochs", epochs, "Enhancer training epochs");
    sub->add_option("--batch-size", batch_size, "Patches per step");
    sub->add_option("--patch-size", patch_size, "Training patch edge in pixels");
    sub->add_option("--lr", learning_rate, "SGD learning rate");
    sub->add_option("--content-weight", content_weight, "Weight of the mean |G(x) - x| term");
  }
  void apply(RunConfig& cfg) const {
    if (epochs) cfg.iqem.epochs = *epochs;
    if (batch_size) cfg.iqem.batch_size = *batch_size;
    if (patch_size) cfg.iqem.patch_size = *patch_size;
    if (learning_rate) cfg.iqem.learning_rate = *learning_rate;
    if (content_weight) cfg.iqem.content_weight = *content_weight;
    cfg.iqem.validate();
  }
};

fs::path output_file(const RunConfig& cfg, const std::string& given, const char* fallback) {
  return given.empty() ? cfg.output_root / fallback : fs::path(given);
}

std::vector<Image> load_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& f : fs::recursive_directory_iterator(dir)) {
    if (f.is_regular_file() && f.path().extension() == ".png") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> images;
  for (const auto& f : files) images.push_back(io::read_png(f));
  return images;
}

int usage(std::ostream& err, const std::string& message) {
  err << "usage error: " << message << '\n';
  return kUsage;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-domain image hiding, enhancement and evaluation"};
  app.require_subcommand(1);

  // hide ---------------------------------------------------------------------
  auto* hide = app.add_subcommand("hide", "Hide one plaintext image in a host image");
  Common hide_common;
  ParamFlags hide_params;
  std::string hide_plain, hide_host, hide_out;
  hide_common.attach(hide);
  hide_params.attach_hiding(hide);
  hide->add_option("--plaintext", hide_plain, "Plaintext PNG (required)");
  hide->add_option("--host", hide_host, "Host PNG (defaults to the config's host)");
  hide->add_option("--out", hide_out, "Synthetic PNG to write (default <output>/synthetic.png)");

  // refine -------------------------------------------------------------------
  auto* refine = app.add_subcommand("refine", "Re-embed plaintext amplitude into a surrogate at low intensity");
  Common refine_common;
  ParamFlags refine_params;
  std::string refine_sur, refine_plain, refine_out;
  refine_common.attach(refine);
  refine_params.attach_refine(refine);
  refine->add_option("--surrogate", refine_sur, "Surrogate PNG (required)");
  refine->add_option("--plaintext", refine_plain, "Plaintext PNG (required)");
  refine->add_option("--out", refine_out, "Refined PNG to write (default <output>/refined.png)");

  // train-enhancer -----------------------------------------------------------
  auto* train = app.add_subcommand("train-enhancer", "Train the enhancer on synthetic images against a host");
  Common train_common;
  TrainFlags train_flags;
  std::string train_dir, train_manifest, train_host, train_out;
  train_common.attach(train);
  train_flags.attach(train);
  train->add_option("--synthetics", train_dir, "Directory of synthetic PNGs");
  train->add_option("--manifest", train_manifest, "Use the train-split synthetics of a manifest");
  train->add_option("--host", train_host, "Host PNG (defaults to the manifest's or config's host)");
  train->add_option("--model-out", train_out, "Model file (default <output>/enhancer.bin)");

  // enhance ------------------------------------------------------------------
  auto* enh = app.add_subcommand("enhance", "Apply a trained enhancer to one synthetic image");
  Common enh_common;
  std::string enh_model, enh_in, enh_out;
  enh_common.attach(enh);
  enh->add_option("--model", enh_model, "Enhancer model file")->required();
  enh->add_option("--in", enh_in, "Synthetic PNG")->required();
  enh->add_option("--out", enh_out, "Surrogate PNG (default <output>/surrogate.png)");

  // generate -----------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "Produce synthetic, surrogate and refined images for a dataset");
  Common gen_common;
  ParamFlags gen_params;
  TrainFlags gen_train;
  std::string gen_root, gen_host, gen_model, gen_label;
  std::optional<std::size_t> gen_size;
  bool gen_no_enhancer = false;
  gen_common.attach(gen);
  gen_params.attach_hiding(gen);
  gen_params.attach_refine(gen);
  gen_train.attach(gen);
  gen->add_option("--dataset", gen_root, "Dataset root (one subdirectory per class)");
  gen->add_option("--host", gen_host, "Host PNG");
  gen->add_option("--model", gen_model, "Pre-trained enhancer; otherwise one is trained per run");
  gen->add_option("--size", gen_size, "Square resize target in pixels");
  gen->add_option("--label", gen_label, "Dataset label used in reports");
  gen->add_flag("--no-enhancer", gen_no_enhancer, "Skip the enhancer: surrogate = synthetic");

  // evaluate -----------------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "SSIM/PSNR report over a manifest");
  Common eval_common;
  std::string eval_manifest, eval_label, eval_split = "all", eval_out;
  eval_common.attach(eval);
  eval->add_option("--manifest", eval_manifest, "manifest.jsonl")->required();
  eval->add_option("--label", eval_label, "Dataset label (default: manifest's)");
  eval->add_option("--split", eval_split, "all, train or test")->check(CLI::IsMember({"all", "train", "test"}));
  eval->add_option("--out", eval_out, "Report prefix; writes <prefix>.txt and <prefix>.csv");

  // utility ------------------------------------------------------------------
  auto* util = app.add_subcommand("utility", "Train and score the desk-scale classifier on one image source");
  Common util_common;
  std::string util_manifest, util_source = "surrogate", util_out;
  bool util_shuffle = false;
  util_common.attach(util);
  util->add_option("--manifest", util_manifest, "manifest.jsonl")->required();
  util->add_option("--source", util_source, "plaintext, surrogate or refined")
      ->check(CLI::IsMember({"plaintext", "surrogate", "refined"}));
  util->add_flag("--shuffle-labels", util_shuffle, "Permute labels (no-signal control)");
  util->add_option("--out", util_out, "Report prefix; writes <prefix>.txt and <prefix>.csv");

  // demo ---------------------------------------------------------------------
  auto* demo_cmd = app.add_subcommand("demo", "End-to-end run on generated toy data");
  Common demo_common;
  ParamFlags demo_params;
  std::size_t demo_size = 64, demo_per_class = 12;
  std::optional<std::size_t> demo_epochs;
  demo_common.attach(demo_cmd);
  demo_params.attach_hiding(demo_cmd);
  demo_params.attach_refine(demo_cmd);
  demo_cmd->add_option("--size", demo_size, "Image edge in pixels");
  demo_cmd->add_option("--per-class", demo_per_class, "Images per class");
  demo_cmd->add_option("--epochs", demo_epochs, "Enhancer training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (hide->parsed()) {
      RunConfig cfg = hide_common.resolve();
      hide_params.apply(cfg);
      // Checked after the parameters so a bad --alpha is reported on its own.
      if (hide_plain.empty()) return usage(err, "hide: --plaintext is required");
      const fs::path host_path = !hide_host.empty() ? fs::path(hide_host)
                                 : cfg.host         ? *cfg.host
                                                    : throw ValidationError("hide: --host is required");
      const Image plain = io::read_png(hide_plain);
      const Image host = io::resize(io::convert_channels(io::read_png(host_path), plain.channels()), plain.height(),
                                    plain.width());
      const auto result = ihm::hide_detailed(plain, host, cfg.hiding);
      const fs::path target = output_file(cfg, hide_out, "synthetic.png");
      io::write_png(target, result.image);
      out << "wrote " << target.string() << " (alpha=" << cfg.hiding.alpha << ", beta=" << cfg.hiding.beta
          << ", imaginary residue " << result.max_imaginary << ")\n";
    } else if (refine->parsed()) {
      RunConfig cfg = refine_common.resolve();
      refine_params.apply(cfg);
      if (refine_sur.empty() || refine_plain.empty()) return usage(err, "refine: --surrogate and --plaintext are required");
      const Image sur = io::read_png(refine_sur);
      const Image plain = io::read_png_as(refine_plain, sur.shape());
      const fs::path target = output_file(cfg, refine_out, "refined.png");
      io::write_png(target, ihm::refine(sur, plain, cfg.refine));
      out << "wrote " << target.string() << " (alpha'=" << cfg.refine.alpha << ", beta'=" << cfg.refine.beta << ")\n";
    } else if (train->parsed()) {
      RunConfig cfg = train_common.resolve();
      train_flags.apply(cfg);
      std::vector<Image> synthetics;
      std::optional<fs::path> host_path = cfg.host;
      if (!train_manifest.empty()) {
        const auto m = read_manifest(train_manifest);
        const auto load = pipeline::manifest_loader(m.shape);
        for (const auto& e : m.entries) {
          if (e.split == Split::train) synthetics.push_back(load(m.resolve(e.synthetic_path)));
        }
        host_path = m.resolve(m.host_path);
      } else if (!train_dir.empty()) {
        synthetics = load_directory(train_dir);
      } else {
        throw ValidationError("train-enhancer: give --synthetics or --manifest");
      }
      if (!train_host.empty()) host_path = train_host;
      if (!host_path) throw ValidationError("train-enhancer: --host is required");
      if (synthetics.empty()) throw ValidationError("train-enhancer: no synthetic images found");
      const Image host = io::read_png_as(*host_path, synthetics.front().shape());
      const auto model = iqem::train_enhancer(synthetics, host, cfg.iqem, [&](const iqem::EpochStats& s) {
        if ((s.epoch + 1) % 10 == 0 || s.epoch + 1 == cfg.iqem.epochs) {
          err << "epoch " << s.epoch + 1 << ": generator " << s.generator_loss << ", discriminator "
              << s.discriminator_loss << '\n';
        }
      });
      const fs::path target = output_file(cfg, train_out, "enhancer.bin");
      if (target.has_parent_path()) fs::create_directories(target.parent_path());
      iqem::save_model(model, target);
      out << "wrote " << target.string() << '\n';
    } else if (enh->parsed()) {
      RunConfig cfg = enh_common.resolve();
      const auto model = iqem::load_model(enh_model);
      const fs::path target = output_file(cfg, enh_out, "surrogate.png");
      io::write_png(target, iqem::enhance(model, io::read_png(enh_in)));
      out << "wrote " << target.string() << '\n';
    } else if (gen->parsed()) {
      RunConfig cfg = gen_common.resolve();
      gen_params.apply(cfg);
      gen_train.apply(cfg);
      if (!gen_root.empty()) cfg.dataset.root = gen_root;
      if (!gen_host.empty()) cfg.host = gen_host;
      if (!gen_model.empty()) cfg.model = gen_model;
      if (gen_size) cfg.dataset.height = cfg.dataset.width = *gen_size;
      if (!gen_label.empty()) cfg.dataset_label = gen_label;
      if (gen_no_enhancer) cfg.train_enhancer = false;
      if (cfg.dataset.root.empty()) throw ValidationError("generate: --dataset is required");
      if (!cfg.host) throw ValidationError("generate: --host is required");

      const auto dataset = pipeline::ingest(cfg.dataset);
      for (const auto& s : dataset.skipped) err << "warning: skipped " << s << '\n';
      const Image host = io::read_png_as(*cfg.host, dataset.shape);

      std::optional<iqem::EnhancerModel> model;
      std::string note = "none";
      if (cfg.model) {
        model = iqem::load_model(*cfg.model);
        note = "loaded:" + cfg.model->filename().string();
      } else if (cfg.train_enhancer) {
        std::vector<Image> synthetics;
        for (const auto& item : dataset.items) {
          if (item.split == Split::train) synthetics.push_back(ihm::hide(item.image, host, cfg.hiding));
        }
        cfg.iqem.patch_size = std::min({cfg.iqem.patch_size, dataset.shape.height, dataset.shape.width});
        model = iqem::train_enhancer(synthetics, host, cfg.iqem);
        fs::create_directories(cfg.output_root);
        iqem::save_model(*model, cfg.output_root / "enhancer.bin");
        note = "trained-per-run";
      }
      pipeline::GenerateOptions options;
      options.params = cfg.hiding;
      options.params_prime = cfg.refine;
      options.output_dir = cfg.output_root;
      options.dataset_label = cfg.dataset_label;
      options.seed = cfg.seed;
      options.model = model ? &*model : nullptr;
      options.enhancer_note = note;
      const auto result = pipeline::generate(dataset, host, options);
      for (const auto& f : result.failures) err << "warning: " << f.plaintext_id << ": " << f.message << '\n';
      out << "wrote " << result.manifest_path.string() << " (" << result.manifest.entries.size() << " entries, "
          << dataset.skipped.size() << " skipped, " << result.failures.size() << " failed)\n";
    } else if (eval->parsed()) {
      RunConfig cfg = eval_common.resolve();
      const auto manifest = read_manifest(eval_manifest);
      metrics::EvaluateOptions options;
      options.dataset_label = eval_label.empty() ? manifest.dataset_label : eval_label;
      if (eval_split != "all") options.split = split_from_string(eval_split);
      const auto report = metrics::evaluate_pairs(manifest, pipeline::manifest_loader(manifest.shape), options);
      metrics::write_report_table(report, out);
      const fs::path prefix = eval_out.empty() ? fs::path(eval_manifest).parent_path() / "report" : fs::path(eval_out);
      std::ofstream txt(prefix.string() + ".txt");
      metrics::write_report_table(report, txt);
      std::ofstream csv(prefix.string() + ".csv");
      metrics::write_report_records(report, csv);
      if (!txt || !csv) throw IoError("cannot write report " + prefix.string());
    } else if (util->parsed()) {
      RunConfig cfg = util_common.resolve();
      const auto manifest = read_manifest(util_manifest);
      pipeline::UtilityOptions options;
      options.source = pipeline::source_from_string(util_source);
      options.shuffle_labels = util_shuffle;
      options.seed = cfg.seed;
      const std::vector<pipeline::UtilityResult> results{pipeline::utility_check(manifest, options)};
      pipeline::write_utility_table(results, out);
      if (!util_out.empty()) {
        std::ofstream txt(util_out + ".txt");
        pipeline::write_utility_table(results, txt);
        std::ofstream csv(util_out + ".csv");
        pipeline::write_utility_records(results, csv);
      }
    } else if (demo_cmd->parsed()) {
      RunConfig cfg = demo_common.resolve();
      if (demo_common.output.empty() && demo_common.config.empty() && std::getenv(kOutputRootEnv) == nullptr) {
        cfg.output_root = "fesf_demo";
      }
      demo_params.apply(cfg);
      demo::DemoOptions options;
      options.output_dir = cfg.output_root;
      options.seed = cfg.seed;
      options.image_size = demo_size;
      options.per_class = demo_per_class;
      options.params = cfg.hiding;
      options.params_prime = cfg.refine;
      if (demo_epochs) options.enhancer.epochs = *demo_epochs;
      const auto result = demo::run_demo(options);
      metrics::write_report_table(result.report, out);
      out << '\n';
      pipeline::write_utility_table(result.utility, out);
      out << "\noutputs in " << options.output_dir.string() << '\n';
    }
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << '\n';
    return kTraining;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}

}  // namespace fesf::cli
