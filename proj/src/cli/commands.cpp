#include "dermabench/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "dermabench/data/batch.hpp"
#include "dermabench/data/image.hpp"
#include "dermabench/data/manifest.hpp"
#include "dermabench/error.hpp"
#include "dermabench/metrics/comparison.hpp"
#include "dermabench/metrics/plot.hpp"
#include "dermabench/metrics/report.hpp"
#include "dermabench/modelzoo/checkpoint.hpp"
#include "dermabench/training/experiment.hpp"
#include "dermabench/training/trainer.hpp"
#include "dermabench/util/files.hpp"

namespace dermabench::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Echoes the effective configuration and stores it under reports/.
void echo_config(const CliConfig& config, const std::string& command, std::ostream& err) {
  err << "configuration for '" << command << "' (flags > config file > defaults):\n"
      << config.describe();
  const OutputLayout layout{config.output_dir};
  util::ensure_writable_directory(layout.reports());
  ordered_json doc;
  doc["command"] = command;
  doc["created_at"] = util::iso_utc_timestamp();
  doc["configuration"] = config.to_json();
  util::write_file_atomic(layout.reports() / ("config-" + command + ".json"), doc.dump(2) + "\n");
}

data::DatasetManifest load_split_manifest(const CliConfig& config,
                                          const std::optional<fs::path>& manifest) {
  const fs::path path = manifest.value_or(OutputLayout{config.output_dir}.manifest());
  if (!fs::exists(path))
    throw ConfigError("manifest not found: " + path.string() + " (run 'split' first)");
  data::DatasetManifest m = data::DatasetManifest::load(path);
  if (!m.is_split()) throw ConfigError("manifest has no train/validation split: " + path.string());
  return m;
}

std::string environment_note(const training::TrainConfig& config) {
  std::ostringstream os;
  os << "libtorch " << TORCH_VERSION_MAJOR << "." << TORCH_VERSION_MINOR << "."
     << TORCH_VERSION_PATCH << " CPU, " << torch::get_num_threads() << " intra-op threads";
  if (config.effective_micro_batch() != config.batch_size)
    os << ", gradient accumulation over micro-batches of " << config.effective_micro_batch()
       << " (batch-norm statistics per micro-batch)";
  return os.str();
}

std::string label_text(data::LesionLabel label) { return std::string(data::label_name(label)); }

}  // namespace

int cmd_split(const CliConfig& config, std::ostream& out, std::ostream& err) {
  if (!config.dataset_root)
    throw ConfigError("no dataset root given (use --root or [data] root)");
  if (!fs::is_directory(*config.dataset_root))
    throw ConfigError("dataset root does not exist: " + config.dataset_root->string());
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  echo_config(config, "split", err);

  const data::DatasetManifest scanned = data::scan_dataset(*config.dataset_root);
  for (const auto& w : scanned.warnings()) err << "warning: " << w.path << ": " << w.message << "\n";
  std::vector<std::string> warnings;
  const data::DatasetManifest split =
      data::split_manifest(scanned, config.train_fraction, config.seed, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  const OutputLayout layout{config.output_dir};
  split.save(layout.manifest());
  const auto counts = split.counts();
  bool first = true;
  for (auto label : data::kAllLabels) {
    const auto it = counts.find(label);
    const data::ClassCounts c = it == counts.end() ? data::ClassCounts{} : it->second;
    out << (first ? "" : ", ") << data::label_name(label) << " " << c.train << "/"
        << c.validation;
    first = false;
  }
  out << "\n";
  err << "manifest written to " << layout.manifest().string() << "\n";
  return kExitOk;
}

int cmd_train(const CliConfig& config, const std::optional<fs::path>& manifest_path,
              std::ostream& out, std::ostream& err) {
  training::TrainConfig tc = config.training;
  tc.seed = config.seed;
  tc.validate();
  config.augmentation.validate();
  const OutputLayout layout{config.output_dir};
  util::ensure_writable_directory(layout.root);
  echo_config(config, "train", err);
  const data::DatasetManifest manifest = load_split_manifest(config, manifest_path);

  for (auto backbone : config.backbones) {
    const std::string key(modelzoo::backbone_key(backbone));
    training::ExperimentOptions opts;
    opts.weights = config.weights;
    opts.weight_cache = config.cache_dir;
    opts.workers = config.workers;
    opts.environment_note = environment_note(tc);
    opts.on_epoch = [&](const training::EpochRecord& r) {
      out << "[" << key << "] epoch " << r.epoch << "/" << tc.epochs << "  train_loss "
          << fixed(r.train_loss, 4) << "  train_acc " << fixed(r.train_accuracy, 4)
          << "  val_loss " << fixed(r.val_loss, 4) << "  val_acc " << fixed(r.val_accuracy, 4)
          << "  (" << fixed(r.wall_seconds, 1) << " s)\n"
          << std::flush;
    };
    const training::RunRecord record = training::run_experiment(
        manifest, backbone, tc, config.augmentation, layout.root, opts);
    out << "[" << key << "] test evaluation: accuracy "
        << fixed(record.test_evaluation->accuracy, 4) << ", loss "
        << fixed(record.test_evaluation->loss, 4) << " over " << record.test_evaluation->samples
        << " held-out images\n";
    out << "[" << key << "] checkpoint " << (layout.root / record.checkpoint_path).string()
        << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const CliConfig& config, const fs::path& checkpoint,
                 const std::optional<fs::path>& manifest_path, std::ostream& out,
                 std::ostream& err) {
  echo_config(config, "evaluate", err);
  const data::DatasetManifest manifest = load_split_manifest(config, manifest_path);
  modelzoo::ClassifierModel model = modelzoo::load_checkpoint(checkpoint);

  data::BatchOptions opts;
  opts.batch_size = config.training.batch_size;
  opts.workers = config.workers;
  data::ManifestBatchStream stream(manifest, data::Split::Validation, opts);
  const training::EvaluationResult result = training::evaluate(*model, stream);
  const std::string name(modelzoo::backbone_display_name(model->backbone_id()));
  const metrics::MetricsReport report = metrics::classification_report(result.per_sample, name);

  out << name << ": accuracy " << fixed(result.accuracy, 4) << ", loss "
      << fixed(result.loss, 4) << " over " << result.per_sample.size() << " images\n"
      << metrics::render_classification_table(std::span(&report, 1));

  ordered_json doc;
  doc["checkpoint"] = checkpoint.string();
  doc["manifest_fingerprint"] = manifest.fingerprint();
  doc["loss"] = result.loss;
  doc["accuracy"] = result.accuracy;
  doc["samples"] = result.per_sample.size();
  doc["report"] = report.to_json();
  const fs::path report_path =
      OutputLayout{config.output_dir}.reports() / (checkpoint.stem().string() + "-evaluation.json");
  util::write_file_atomic(report_path, doc.dump(2) + "\n");
  err << "evaluation written to " << report_path.string() << "\n";
  return kExitOk;
}

int cmd_compare(const CliConfig& config, const std::optional<fs::path>& run_dir,
                bool with_literature, std::ostream& out, std::ostream& err) {
  const OutputLayout layout{config.output_dir};
  const fs::path dir = run_dir.value_or(layout.runs());
  if (!fs::is_directory(dir)) throw ConfigError("run directory does not exist: " + dir.string());
  echo_config(config, "compare", err);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("run-", 0) == 0 && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no run records (run-*.json) in " + dir.string());

  std::vector<training::RunRecord> records;
  for (const auto& f : files) records.push_back(training::RunRecord::load(f));
  const metrics::ComparisonTable table = metrics::comparison_table(records, with_literature);
  for (const auto& w : table.warnings) err << "warning: " << w << "\n";
  out << table.render_text();

  util::ensure_writable_directory(layout.reports());
  util::write_file_atomic(layout.reports() / "comparison.txt", table.render_text());
  util::write_file_atomic(layout.reports() / "comparison.csv", table.render_csv());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string stem = files[i].stem().string();
    if (!r.history.empty()) metrics::render_curves(r.history, layout.reports() / stem, r.model_name);
    if (r.test_evaluation && r.test_evaluation->report.confusion.total() > 0)
      metrics::render_confusion(r.test_evaluation->report.confusion,
                                layout.reports() / (stem + "-confusion.png"),
                                "Confusion matrix of " + r.model_name);
  }
  err << "comparison written to " << (layout.reports() / "comparison.txt").string() << "\n";
  return kExitOk;
}

std::vector<PredictionResult> predict_images(modelzoo::ClassifierModelImpl& model,
                                             const std::vector<fs::path>& images,
                                             std::size_t batch_size,
                                             const std::string& checkpoint_id) {
  std::vector<PredictionResult> results(images.size());
  std::vector<std::size_t> pending;
  std::vector<data::ImageTensor> tensors;
  const std::size_t chunk = std::max<std::size_t>(1, batch_size);

  auto flush = [&] {
    if (tensors.empty()) return;
    const torch::Tensor probs = model.predict(tensors).to(torch::kFloat64).contiguous();
    const auto acc = probs.accessor<double, 2>();
    for (std::size_t j = 0; j < pending.size(); ++j) {
      auto& r = results[pending[j]];
      r.probabilities = {acc[j][0], acc[j][1]};
      r.label = data::label_from_index(metrics::argmax_lower_tie(r.probabilities));
    }
    pending.clear();
    tensors.clear();
  };

  for (std::size_t i = 0; i < images.size(); ++i) {
    results[i].image_path = images[i].string();
    results[i].checkpoint = checkpoint_id;
    try {
      tensors.push_back(data::load_image(images[i], data::kModelInputSize));
      pending.push_back(i);
    } catch (const DecodeError& e) {
      results[i].error = e.what();
    }
    if (tensors.size() == chunk) flush();
  }
  flush();
  return results;
}

int cmd_predict(const CliConfig& config, const fs::path& checkpoint,
                const std::vector<fs::path>& images, const std::optional<fs::path>& json_path,
                std::ostream& out, std::ostream& err) {
  if (images.empty()) throw ConfigError("predict needs at least one image path");
  echo_config(config, "predict", err);
  modelzoo::ClassifierModel model = modelzoo::load_checkpoint(checkpoint);
  const auto results =
      predict_images(*model, images, config.training.batch_size, checkpoint.string());

  ordered_json doc;
  doc["checkpoint"] = checkpoint.string();
  doc["backbone"] = std::string(modelzoo::backbone_key(model->backbone_id()));
  doc["predictions"] = ordered_json::array();
  std::size_t failures = 0;
  for (const auto& r : results) {
    ordered_json item;
    item["image"] = r.image_path;
    item["checkpoint"] = r.checkpoint;
    if (r.label) {
      out << r.image_path << ": " << label_text(*r.label) << "  (benign "
          << fixed(r.probabilities[0], 4) << ", malignant " << fixed(r.probabilities[1], 4)
          << ")\n";
      item["label"] = label_text(*r.label);
      item["probabilities"] = {{"benign", r.probabilities[0]}, {"malignant", r.probabilities[1]}};
    } else {
      ++failures;
      out << r.image_path << ": error: " << r.error << "\n";
      item["error"] = r.error;
    }
    doc["predictions"].push_back(std::move(item));
  }
  const fs::path json_file =
      json_path.value_or(OutputLayout{config.output_dir}.reports() / "predictions.json");
  util::write_file_atomic(json_file, doc.dump(2) + "\n");
  err << "predictions written to " << json_file.string() << "\n";
  return failures == results.size() ? kExitFailure : kExitOk;
}

int cmd_augment_preview(const CliConfig& config, const fs::path& image, int count,
                        std::ostream& out, std::ostream& err) {
  if (count < 1) throw ConfigError("augment-preview needs -n of at least 1");
  config.augmentation.validate();
  echo_config(config, "augment-preview", err);
  const data::ImageTensor source = data::load_image(image, data::kModelInputSize);
  const fs::path dir = OutputLayout{config.output_dir}.previews();
  util::ensure_writable_directory(dir);
  const int width = static_cast<int>(std::to_string(count).size());
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng = data::sample_rng(config.seed, 0, static_cast<std::uint64_t>(i));
    const data::ImageTensor variant = data::augment(source, config.augmentation, rng);
    std::ostringstream name;
    name << image.stem().string() << "-aug" << std::setw(width) << std::setfill('0') << (i + 1)
         << ".png";
    data::save_image(variant, dir / name.str());
    out << (dir / name.str()).string() << "\n";
  }
  return kExitOk;
}

namespace {

struct Flag {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmark of transfer-learning backbones for benign/malignant skin lesion "
               "classification",
               "dermabench"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string config_file;
  app.add_option("--config", config_file, "INI configuration file");
  std::vector<Flag> flags;
  flags.reserve(32);
  auto flag = [&](CLI::App* where, const std::string& name, const std::string& key,
                  const std::string& help) {
    flags.push_back({key, {}, nullptr});
    flags.back().option = where->add_option(name, flags.back().value, help);
    return flags.back().option;
  };
  flag(&app, "--seed", "data.seed", "Seed for splitting, shuffling, augmentation and init");
  flag(&app, "--output-dir", "output.dir", "Output directory");
  flag(&app, "--workers", "data.workers", "Image decoding threads (never changes results)");
  flag(&app, "--weights", "models.weights", "pretrained or random");
  flag(&app, "--cache-dir", "models.cache_dir", "Pretrained weight cache");

  auto* split = app.add_subcommand("split", "Scan a dataset tree and write a stratified manifest");
  flag(split, "--root", "data.root", "Dataset root containing benign/ and malignant/");
  flag(split, "--fraction", "data.train_fraction", "Train fraction per class");

  std::string manifest;
  auto* train = app.add_subcommand("train", "Fine-tune backbones and record the runs");
  flag(train, "--backbone", "models.backbones", "Comma-separated backbones");
  flag(train, "--epochs", "training.epochs", "Epochs");
  flag(train, "--batch-size", "training.batch_size", "Batch size");
  flag(train, "--micro-batch-size", "training.micro_batch_size",
       "Samples per forward pass (gradient accumulation)");
  flag(train, "--learning-rate", "training.learning_rate", "Adam learning rate");
  flag(train, "--freeze-policy", "training.freeze_policy", "full or frozen");
  train->add_option("--manifest", manifest, "Manifest (default <output-dir>/manifest.json)");

  std::string checkpoint;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on the held-out split");
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--manifest", manifest, "Manifest (default <output-dir>/manifest.json)");
  flag(evaluate, "--batch-size", "training.batch_size", "Batch size");

  std::string run_dir;
  bool with_literature = false;
  auto* compare = app.add_subcommand("compare", "Comparison tables and plots over run records");
  compare->add_option("--run-dir", run_dir, "Directory of run-*.json (default <output-dir>/runs)");
  compare->add_flag("--with-literature", with_literature, "Append published prior-work rows");

  std::vector<std::string> images;
  std::string json_path;
  auto* predict = app.add_subcommand("predict", "Classify images with a checkpoint");
  predict->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  predict->add_option("images", images, "Image files");
  predict->add_option("--json", json_path, "JSON output (default <output-dir>/reports/predictions.json)");
  flag(predict, "--batch-size", "training.batch_size", "Images per forward pass");

  std::string preview_image;
  int preview_count = 4;
  auto* preview = app.add_subcommand("augment-preview", "Write augmented variants of one image");
  preview->add_option("--image", preview_image, "Source image")->required();
  preview->add_option("-n,--count", preview_count, "Number of variants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    CliConfig config = load_config(config_file.empty() ? std::nullopt
                                                       : std::optional<fs::path>(config_file));
    for (const auto& f : flags)
      if (f.option->count() > 0) set_value(config, f.key, f.value, "flag");

    const auto opt_path = [](const std::string& s) {
      return s.empty() ? std::nullopt : std::optional<fs::path>(s);
    };
    if (split->parsed()) return cmd_split(config, out, err);
    if (train->parsed()) return cmd_train(config, opt_path(manifest), out, err);
    if (evaluate->parsed()) return cmd_evaluate(config, checkpoint, opt_path(manifest), out, err);
    if (compare->parsed()) return cmd_compare(config, opt_path(run_dir), with_literature, out, err);
    if (predict->parsed()) {
      std::vector<fs::path> paths(images.begin(), images.end());
      return cmd_predict(config, checkpoint, paths, opt_path(json_path), out, err);
    }
    if (preview->parsed())
      return cmd_augment_preview(config, preview_image, preview_count, out, err);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_usage_error() ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace dermabench::cli
