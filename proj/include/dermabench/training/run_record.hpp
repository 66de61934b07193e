#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "dermabench/data/augment.hpp"
#include "dermabench/metrics/report.hpp"
#include "dermabench/training/config.hpp"
#include "dermabench/training/history.hpp"

namespace dermabench::training {

struct EvaluationSummary {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t samples = 0;
  metrics::MetricsReport report;
};

/// Everything needed to reproduce and report one training run.
struct RunRecord {
  static constexpr int kFormatVersion = 1;

  std::string backbone;        // key, e.g. "densenet169"
  std::string model_name;      // display name, e.g. "DenseNet169"
  std::string backbone_variant;
  std::string weights;         // "pretrained" or "random"
  TrainConfig train_config;
  data::AugmentationConfig augmentation;
  std::string manifest_fingerprint;
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
  TrainingHistory history;
  /// Copy of the last history row's validation fields; empty for 0 epochs.
  std::optional<double> final_validation_loss;
  std::optional<double> final_validation_accuracy;
  /// Post-training evaluation pass over the held-out split.
  std::optional<EvaluationSummary> test_evaluation;
  std::string checkpoint_path;
  std::string environment_note;
  std::string holdout_note;
  std::string created_at;

  nlohmann::ordered_json to_json() const;
  static RunRecord from_json(const nlohmann::ordered_json& doc);

  void save(const std::filesystem::path& path) const;
  static RunRecord load(const std::filesystem::path& path);

  /// run-<backbone>-<seed>-<timestamp>
  std::string file_stem(const std::string& timestamp) const;
};

nlohmann::ordered_json augmentation_to_json(const data::AugmentationConfig& config);
data::AugmentationConfig augmentation_from_json(const nlohmann::ordered_json& doc);

}  // namespace dermabench::training
