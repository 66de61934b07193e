#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dermabench/data/augment.hpp"
#include "dermabench/modelzoo/backbone_id.hpp"
#include "dermabench/training/config.hpp"

namespace dermabench::cli {

/// Effective settings of one invocation. Every field records where its value
/// came from: "default", "file" or "flag".
///
/// Config file (INI):
///
///   [data]          root, train_fraction, seed, workers
///   [augmentation]  zoom_range, rotation_range, horizontal_flip, vertical_flip
///   [training]      learning_rate, beta_1, beta_2, epsilon, epochs,
///                   batch_size, micro_batch_size, freeze_policy
///   [models]        backbones (comma separated), weights, cache_dir
///   [output]        dir
struct CliConfig {
  std::optional<std::filesystem::path> dataset_root;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  data::AugmentationConfig augmentation = data::AugmentationConfig::table1();
  training::TrainConfig training;
  std::vector<modelzoo::BackboneId> backbones{modelzoo::kAllBackbones.begin(),
                                              modelzoo::kAllBackbones.end()};
  modelzoo::WeightSource weights = modelzoo::WeightSource::Pretrained;
  /// Unset: $DERMABENCH_CACHE, then ~/.cache/dermabench.
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path output_dir = "dermabench-out";

  /// Key ("section.name") -> origin.
  std::map<std::string, std::string> origin;

  /// Every effective value plus its origin.
  nlohmann::ordered_json to_json() const;
  /// One "key = value  (origin)" line per setting.
  std::string describe() const;
};

/// Defaults overlaid with the file, if any. Unknown sections or keys and
/// malformed values raise ConfigError.
CliConfig load_config(const std::optional<std::filesystem::path>& file);

/// Applies one "section.name" setting from its textual form.
void set_value(CliConfig& config, const std::string& key, const std::string& value,
               const std::string& origin);

/// Comma-separated backbone list.
std::vector<modelzoo::BackboneId> parse_backbone_list(const std::string& text);

}  // namespace dermabench::cli
