#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "dermabench/modelzoo/classifier.hpp"

namespace dermabench::modelzoo {

/// Single-file tensor container used for checkpoints and for cached
/// pretrained weights.
///
///   bytes 0..7    magic "DRMBENCH"
///   bytes 8..11   format version, uint32 little endian
///   bytes 12..19  header length in bytes, uint64 little endian
///   header        UTF-8 JSON: metadata plus a tensor table
///                 [{name, dtype ("f32" | "i64"), shape, offset, nbytes}]
///   payload       raw little-endian tensor data, offsets relative to here
///   trailer       FNV-1a 64 of header and payload, uint64 little endian
namespace container {

inline constexpr char kMagic[8] = {'D', 'R', 'M', 'B', 'E', 'N', 'C', 'H'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kVersionOffset = 8;

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// Atomic write. `metadata` must be a JSON object; "tensors" and
/// "format_version" are filled in.
void write(const std::filesystem::path& path, nlohmann::ordered_json metadata,
           const NamedTensors& tensors);

struct Contents {
  nlohmann::ordered_json metadata;
  NamedTensors tensors;
};

/// Throws IncompatibleCheckpointError on a version mismatch and
/// CheckpointIntegrityError on bad magic, truncation or a hash mismatch.
Contents read(const std::filesystem::path& path);

}  // namespace container

struct CheckpointMetadata {
  int format_version = 0;
  BackboneId backbone_id = BackboneId::ResNet101;
  std::uint64_t head_seed = 0;
  FreezePolicy freeze_policy = FreezePolicy::FullFineTune;
  WeightSource weight_source = WeightSource::Pretrained;
  PreprocessDescriptor preprocessing;
  std::string created_at;
  std::string train_config_fingerprint;
};

void save_checkpoint(ClassifierModelImpl& model, const std::filesystem::path& path,
                     const std::string& train_config_fingerprint = {});

ClassifierModel load_checkpoint(const std::filesystem::path& path);

CheckpointMetadata read_checkpoint_metadata(const std::filesystem::path& path);

/// Writes backbone parameters and buffers (no head) in the layout
/// build_model() expects in the weight cache.
void save_backbone_weights(BackboneNet& backbone, BackboneId id,
                           const std::filesystem::path& path);

/// Copies tensors into `module`'s parameters and buffers by name. Every
/// name and shape must match exactly; throws CheckpointError otherwise.
void load_named_state(torch::nn::Module& module, const container::NamedTensors& tensors,
                      const std::string& what);

}  // namespace dermabench::modelzoo
