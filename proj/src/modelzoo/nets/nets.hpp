#pragma once

#include <memory>

#include "dermabench/modelzoo/backbone.hpp"

namespace dermabench::modelzoo::nets {

std::shared_ptr<BackboneNet> make_resnet101();
std::shared_ptr<BackboneNet> make_densenet169();
std::shared_ptr<BackboneNet> make_efficientnet_b0();
std::shared_ptr<BackboneNet> make_inception_v3();

inline torch::nn::Conv2d conv(int64_t in, int64_t out, torch::ExpandingArray<2> kernel,
                              torch::ExpandingArray<2> stride = 1,
                              torch::ExpandingArray<2> padding = 0, int64_t groups = 1,
                              bool bias = false) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, kernel)
                               .stride(stride)
                               .padding(padding)
                               .groups(groups)
                               .bias(bias));
}

inline torch::nn::BatchNorm2d batch_norm(int64_t channels, double eps = 1e-5) {
  return torch::nn::BatchNorm2d(torch::nn::BatchNorm2dOptions(channels).eps(eps).momentum(0.1));
}

}  // namespace dermabench::modelzoo::nets
