#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include <torch/torch.h>

#include "dermabench/data/image.hpp"
#include "dermabench/modelzoo/backbone.hpp"
#include "dermabench/modelzoo/backbone_id.hpp"
#include "dermabench/modelzoo/preprocess.hpp"

namespace dermabench::modelzoo {

struct ModelOptions {
  FreezePolicy freeze_policy = FreezePolicy::FullFineTune;
  WeightSource weights = WeightSource::Pretrained;
  /// Seeds the head initialisation, and the backbone too for Random weights.
  std::uint64_t head_seed = 0;
  /// Weight cache; defaults to $DERMABENCH_CACHE, then ~/.cache/dermabench.
  std::optional<std::filesystem::path> cache_dir;
};

/// Resolved weight cache directory.
std::filesystem::path weight_cache_dir(const std::optional<std::filesystem::path>& override_dir);

/// Expected location of the cached backbone weights.
std::filesystem::path pretrained_weight_path(BackboneId id, const std::filesystem::path& cache_dir);

/// Backbone feature extractor followed by global average pooling, one dense
/// layer with two units and a softmax.
///
/// forward() takes preprocessed (N, 224, 224, 3) input; predict() does the
/// preprocessing itself. Parameters are named "backbone.<torchvision name>"
/// and "head.weight" / "head.bias".
class ClassifierModelImpl : public torch::nn::Module {
 public:
  ClassifierModelImpl(BackboneId id, FreezePolicy freeze_policy, std::uint64_t head_seed,
                      WeightSource weights);

  /// Softmax probabilities, (N, 2).
  torch::Tensor forward(const torch::Tensor& nhwc);
  /// Pre-softmax scores, (N, 2).
  torch::Tensor logits(const torch::Tensor& nhwc);

  /// Eval mode, no autograd, preprocessing applied. Returns (N, 2).
  torch::Tensor predict(std::span<const data::ImageTensor> images);

  /// Switches to training mode. A frozen backbone stays in inference mode
  /// so its batch-norm statistics do not move.
  void train(bool on = true) override;

  BackboneId backbone_id() const noexcept { return id_; }
  FreezePolicy freeze_policy() const noexcept { return freeze_policy_; }
  WeightSource weight_source() const noexcept { return weight_source_; }
  std::uint64_t head_seed() const noexcept { return head_seed_; }
  const PreprocessDescriptor& preprocessing() const noexcept { return preprocessing_; }

  /// All parameters, trainable or not (buffers excluded).
  int64_t parameter_count() const;
  int64_t trainable_parameter_count() const;

  BackboneNet& backbone() { return *backbone_; }
  torch::nn::Linear& head() { return head_; }

 private:
  void apply_freeze_policy();

  BackboneId id_;
  FreezePolicy freeze_policy_;
  std::uint64_t head_seed_;
  WeightSource weight_source_;
  PreprocessDescriptor preprocessing_;
  std::shared_ptr<BackboneNet> backbone_;
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(ClassifierModel);

/// Builds the classifier. Pretrained weights are read from the cache;
/// AcquisitionError names the backbone and the expected file when they are
/// missing. Random weights use He-normal convolutions, unit batch-norm
/// scale, and a Glorot-uniform head with zero bias, all seeded from
/// options.head_seed.
ClassifierModel build_model(BackboneId id, const ModelOptions& options = {});

/// Parameters and buffers, keyed by their dotted names.
std::vector<std::pair<std::string, torch::Tensor>> named_state(torch::nn::Module& module);

}  // namespace dermabench::modelzoo
