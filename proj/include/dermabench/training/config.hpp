#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "dermabench/modelzoo/backbone_id.hpp"

namespace dermabench::training {

/// Adam with the published default decay terms.
struct AdamSettings {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamSettings&, const AdamSettings&) = default;
};

inline constexpr std::string_view kLossName = "categorical_crossentropy";

/// Defaults: Adam at lr 1e-4, 20 epochs, batch 64.
struct TrainConfig {
  AdamSettings adam;
  int epochs = 20;
  std::size_t batch_size = 64;
  /// Samples per forward/backward pass inside one optimiser step; gradients
  /// are accumulated up to batch_size. 0 means batch_size. Only a memory
  /// knob: batch-norm statistics are taken per micro-batch.
  std::size_t micro_batch_size = 0;
  std::uint64_t seed = 0;
  modelzoo::FreezePolicy freeze_policy = modelzoo::FreezePolicy::FullFineTune;

  std::size_t effective_micro_batch() const noexcept {
    return micro_batch_size == 0 || micro_batch_size > batch_size ? batch_size
                                                                  : micro_batch_size;
  }

  /// Throws ConfigError.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::ordered_json& doc);
  /// Hash of the serialized config.
  std::string fingerprint() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace dermabench::training
