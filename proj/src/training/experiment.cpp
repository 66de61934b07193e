#include "dermabench/training/experiment.hpp"

#include <fstream>

#include "dermabench/error.hpp"
#include "dermabench/metrics/report.hpp"
#include "dermabench/modelzoo/checkpoint.hpp"
#include "dermabench/util/files.hpp"

namespace dermabench::training {

namespace fs = std::filesystem;

ExperimentPaths experiment_paths(const fs::path& output_dir, const std::string& stem) {
  return {output_dir / "runs" / (stem + ".json"), output_dir / "runs" / (stem + "-history.csv"),
          output_dir / "checkpoints" / (stem + ".dbck"),
          output_dir / "reports" / (stem + "-metrics.json")};
}

namespace {

class PartialOutputs {
 public:
  explicit PartialOutputs(const ExperimentPaths& paths) : paths_(paths) {}
  ~PartialOutputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto* p : {&paths_.record, &paths_.history_csv, &paths_.checkpoint, &paths_.metrics})
      fs::remove(*p, ec);
  }
  void commit() { committed_ = true; }

 private:
  ExperimentPaths paths_;
  bool committed_ = false;
};

std::string unique_stem(const fs::path& output_dir, const RunRecord& record,
                        const std::string& timestamp) {
  std::string stem = record.file_stem(timestamp);
  for (int n = 2; fs::exists(experiment_paths(output_dir, stem).record) ||
                  fs::exists(experiment_paths(output_dir, stem).history_csv);
       ++n)
    stem = record.file_stem(timestamp) + "-" + std::to_string(n);
  return stem;
}

}  // namespace

RunRecord run_experiment(const data::DatasetManifest& manifest, modelzoo::BackboneId backbone,
                         const TrainConfig& train_config,
                         const data::AugmentationConfig& augmentation,
                         const fs::path& output_dir, const ExperimentOptions& options) {
  util::ensure_writable_directory(output_dir);
  for (const char* sub : {"runs", "checkpoints", "reports"})
    util::ensure_writable_directory(output_dir / sub);
  train_config.validate();
  augmentation.validate();
  if (!manifest.is_split()) throw ConfigError("the manifest has not been split");

  RunRecord record;
  record.backbone = std::string(modelzoo::backbone_key(backbone));
  record.model_name = std::string(modelzoo::backbone_display_name(backbone));
  record.backbone_variant = std::string(modelzoo::backbone_variant(backbone));
  record.weights = std::string(modelzoo::weight_source_name(options.weights));
  record.train_config = train_config;
  record.augmentation = augmentation;
  record.manifest_fingerprint = manifest.fingerprint();
  record.environment_note = options.environment_note;
  record.holdout_note = std::string(kHoldoutNote);
  record.created_at = util::iso_utc_timestamp();

  const std::string stem = unique_stem(output_dir, record, util::compact_utc_timestamp());
  const ExperimentPaths paths = experiment_paths(output_dir, stem);
  PartialOutputs cleanup(paths);

  data::BatchOptions train_opts;
  train_opts.batch_size = train_config.batch_size;
  train_opts.seed = train_config.seed;
  train_opts.workers = options.workers;
  if (!augmentation.is_identity()) train_opts.augmentation = augmentation;
  data::BatchOptions val_opts = train_opts;
  val_opts.augmentation.reset();
  data::ManifestBatchStream train_stream(manifest, data::Split::Train, train_opts);
  data::ManifestBatchStream val_stream(manifest, data::Split::Validation, val_opts);
  record.train_samples = train_stream.sample_count();
  record.validation_samples = val_stream.sample_count();

  modelzoo::ModelOptions model_opts;
  model_opts.freeze_policy = train_config.freeze_policy;
  model_opts.weights = options.weights;
  model_opts.head_seed = train_config.seed;
  model_opts.cache_dir = options.weight_cache;
  modelzoo::ClassifierModel model = modelzoo::build_model(backbone, model_opts);

  std::ofstream csv(paths.history_csv, std::ios::binary | std::ios::trunc);
  if (!csv) throw FilesystemError("cannot write " + paths.history_csv.string());
  csv << TrainingHistory::kCsvHeader << '\n' << std::flush;

  record.history = train(*model, train_stream, val_stream, train_config,
                         [&](const EpochRecord& epoch) {
                           if (epoch.val_samples != record.validation_samples)
                             throw EvaluationError("validation pass saw " +
                                                   std::to_string(epoch.val_samples) +
                                                   " samples, manifest has " +
                                                   std::to_string(record.validation_samples));
                           csv << TrainingHistory::csv_row(epoch) << '\n' << std::flush;
                           if (!csv) throw FilesystemError("cannot append to " +
                                                           paths.history_csv.string());
                           if (options.on_epoch) options.on_epoch(epoch);
                         });
  csv.close();

  if (!record.history.empty()) {
    record.final_validation_loss = record.history.back().val_loss;
    record.final_validation_accuracy = record.history.back().val_accuracy;
  }

  const EvaluationResult test = evaluate(*model, val_stream);
  EvaluationSummary summary;
  summary.loss = test.loss;
  summary.accuracy = test.accuracy;
  summary.samples = test.per_sample.size();
  summary.report = metrics::classification_report(test.per_sample, record.model_name);
  record.test_evaluation = summary;

  modelzoo::save_checkpoint(*model, paths.checkpoint, train_config.fingerprint());
  record.checkpoint_path = fs::relative(paths.checkpoint, output_dir).generic_string();
  util::write_file_atomic(paths.metrics, summary.report.to_json().dump(2) + "\n");
  record.save(paths.record);
  cleanup.commit();
  return record;
}

}  // namespace dermabench::training
