#pragma once

#include <array>
#include <string>

#include <json.hpp>
#include <torch/torch.h>

#include "dermabench/data/image.hpp"
#include "dermabench/modelzoo/backbone_id.hpp"

namespace dermabench::modelzoo {

/// Per-channel affine input normalisation: (x - mean[c]) / stddev[c] on
/// [0, 1] RGB input. Each backbone uses the convention its published
/// weights were trained with.
struct PreprocessDescriptor {
  std::string scheme;
  std::array<double, 3> mean;
  std::array<double, 3> stddev;

  nlohmann::ordered_json to_json() const;
  static PreprocessDescriptor from_json(const nlohmann::ordered_json& doc);
  friend bool operator==(const PreprocessDescriptor&, const PreprocessDescriptor&) = default;
};

/// ResNet101, DenseNet169, EfficientNet: ImageNet mean/std.
/// InceptionV3: symmetric scaling to [-1, 1] (mean 0.5, std 0.5).
PreprocessDescriptor preprocessing_for(BackboneId id);

/// (H, W, 3) float tensor.
torch::Tensor preprocess_for_backbone(const data::ImageTensor& image, BackboneId id);

/// Stacks images into an (N, H, W, 3) tensor with values in [0, 1].
torch::Tensor images_to_tensor(std::span<const data::ImageTensor> images);

/// Applies the descriptor to an (N, H, W, 3) tensor.
torch::Tensor apply_preprocessing(const torch::Tensor& nhwc,
                                  const PreprocessDescriptor& descriptor);

}  // namespace dermabench::modelzoo
