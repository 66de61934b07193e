// ResNet-101, torchvision v1.5 layout (stride on the 3x3 convolution).

#include "nets.hpp"

namespace dermabench::modelzoo::nets {

namespace {

class BottleneckImpl : public torch::nn::Module {
 public:
  static constexpr int64_t kExpansion = 4;

  BottleneckImpl(int64_t in_channels, int64_t width, int64_t stride, bool downsample)
      : conv1_(register_module("conv1", conv(in_channels, width, 1))),
        bn1_(register_module("bn1", batch_norm(width))),
        conv2_(register_module("conv2", conv(width, width, 3, stride, 1))),
        bn2_(register_module("bn2", batch_norm(width))),
        conv3_(register_module("conv3", conv(width, width * kExpansion, 1))),
        bn3_(register_module("bn3", batch_norm(width * kExpansion))) {
    if (downsample) {
      downsample_ = register_module(
          "downsample",
          torch::nn::Sequential(conv(in_channels, width * kExpansion, 1, stride),
                                batch_norm(width * kExpansion)));
    }
  }

  torch::Tensor forward(torch::Tensor x) {
    torch::Tensor identity = downsample_ ? downsample_->forward(x) : x;
    torch::Tensor out = torch::relu(bn1_(conv1_(x)));
    out = torch::relu(bn2_(conv2_(out)));
    out = bn3_(conv3_(out));
    return torch::relu(out + identity);
  }

 private:
  torch::nn::Conv2d conv1_;
  torch::nn::BatchNorm2d bn1_;
  torch::nn::Conv2d conv2_;
  torch::nn::BatchNorm2d bn2_;
  torch::nn::Conv2d conv3_;
  torch::nn::BatchNorm2d bn3_;
  torch::nn::Sequential downsample_{nullptr};
};
TORCH_MODULE(Bottleneck);

class ResNet final : public BackboneNet {
 public:
  explicit ResNet(std::array<int64_t, 4> blocks)
      : conv1_(register_module("conv1", conv(3, 64, 7, 2, 3))),
        bn1_(register_module("bn1", batch_norm(64))) {
    int64_t in_channels = 64;
    const std::array<int64_t, 4> widths{64, 128, 256, 512};
    for (std::size_t stage = 0; stage < 4; ++stage) {
      torch::nn::Sequential layer;
      const int64_t stride = stage == 0 ? 1 : 2;
      for (int64_t b = 0; b < blocks[stage]; ++b) {
        const bool first = b == 0;
        layer->push_back(Bottleneck(in_channels, widths[stage], first ? stride : 1,
                                    first && (stride != 1 ||
                                              in_channels != widths[stage] * 4)));
        in_channels = widths[stage] * BottleneckImpl::kExpansion;
      }
      layers_[stage] = register_module("layer" + std::to_string(stage + 1), layer);
    }
    channels_ = in_channels;
  }

  torch::Tensor forward(torch::Tensor x) override {
    x = torch::relu(bn1_(conv1_(x)));
    x = torch::max_pool2d(x, 3, 2, 1);
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
  }

  int64_t feature_channels() const override { return channels_; }

 private:
  torch::nn::Conv2d conv1_;
  torch::nn::BatchNorm2d bn1_;
  std::array<torch::nn::Sequential, 4> layers_{nullptr, nullptr, nullptr, nullptr};
  int64_t channels_ = 0;
};

}  // namespace

std::shared_ptr<BackboneNet> make_resnet101() {
  return std::make_shared<ResNet>(std::array<int64_t, 4>{3, 4, 23, 3});
}

}  // namespace dermabench::modelzoo::nets
