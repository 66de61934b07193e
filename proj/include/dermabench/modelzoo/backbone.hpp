#pragma once

#include <memory>

#include <torch/torch.h>

#include "dermabench/modelzoo/backbone_id.hpp"

namespace dermabench::modelzoo {

/// Convolutional feature extractor: NCHW input, NCHW feature map output.
/// Submodule and parameter names follow the torchvision layout so published
/// weights map onto them one to one.
class BackboneNet : public torch::nn::Module {
 public:
  virtual torch::Tensor forward(torch::Tensor x) = 0;
  /// Channels of the final feature map.
  virtual int64_t feature_channels() const = 0;
};

/// Uninitialised architecture (parameters hold libtorch defaults).
std::shared_ptr<BackboneNet> make_backbone(BackboneId id);

}  // namespace dermabench::modelzoo
