#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dermabench/data/augment.hpp"
#include "dermabench/data/manifest.hpp"
#include "dermabench/modelzoo/backbone_id.hpp"
#include "dermabench/modelzoo/classifier.hpp"
#include "dermabench/training/config.hpp"
#include "dermabench/training/run_record.hpp"
#include "dermabench/training/trainer.hpp"

namespace dermabench::training {

struct ExperimentOptions {
  modelzoo::WeightSource weights = modelzoo::WeightSource::Pretrained;
  std::optional<std::filesystem::path> weight_cache;
  unsigned workers = 1;
  EpochCallback on_epoch;
  /// Free text stored in the RunRecord (host, backend, deviations).
  std::string environment_note;
};

inline constexpr std::string_view kHoldoutNote =
    "single held-out split: per-epoch validation metrics and the final test "
    "evaluation are both computed on the same validation split";

/// Paths written by run_experiment, relative to output_dir:
///   runs/<stem>.json, runs/<stem>-history.csv,
///   checkpoints/<stem>.dbck, reports/<stem>-metrics.json
struct ExperimentPaths {
  std::filesystem::path record;
  std::filesystem::path history_csv;
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
};

ExperimentPaths experiment_paths(const std::filesystem::path& output_dir,
                                 const std::string& stem);

/// Build, train, test-evaluate, checkpoint, persist. The history CSV is
/// appended and flushed after every epoch. Every file of this run is removed
/// if any step fails. An unwritable output_dir raises FilesystemError before
/// the model is built.
RunRecord run_experiment(const data::DatasetManifest& manifest, modelzoo::BackboneId backbone,
                         const TrainConfig& train_config,
                         const data::AugmentationConfig& augmentation,
                         const std::filesystem::path& output_dir,
                         const ExperimentOptions& options = {});

}  // namespace dermabench::training
