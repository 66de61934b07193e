// DenseNet-169: growth rate 32, block sizes (6, 12, 32, 32), bottleneck 4x.

#include <vector>

#include "nets.hpp"

namespace dermabench::modelzoo::nets {

namespace {

constexpr int64_t kGrowth = 32;
constexpr int64_t kBottleneck = 4;

class DenseLayerImpl : public torch::nn::Module {
 public:
  explicit DenseLayerImpl(int64_t in_channels)
      : norm1_(register_module("norm1", batch_norm(in_channels))),
        conv1_(register_module("conv1", conv(in_channels, kBottleneck * kGrowth, 1))),
        norm2_(register_module("norm2", batch_norm(kBottleneck * kGrowth))),
        conv2_(register_module("conv2", conv(kBottleneck * kGrowth, kGrowth, 3, 1, 1))) {}

  torch::Tensor forward(const std::vector<torch::Tensor>& inputs) {
    torch::Tensor x = torch::cat(inputs, 1);
    x = conv1_(torch::relu(norm1_(x)));
    return conv2_(torch::relu(norm2_(x)));
  }

 private:
  torch::nn::BatchNorm2d norm1_;
  torch::nn::Conv2d conv1_;
  torch::nn::BatchNorm2d norm2_;
  torch::nn::Conv2d conv2_;
};
TORCH_MODULE(DenseLayer);

class DenseBlockImpl : public torch::nn::Module {
 public:
  DenseBlockImpl(int64_t layers, int64_t in_channels) {
    for (int64_t i = 0; i < layers; ++i)
      layers_.push_back(register_module("denselayer" + std::to_string(i + 1),
                                        DenseLayer(in_channels + i * kGrowth)));
  }

  torch::Tensor forward(torch::Tensor x) {
    std::vector<torch::Tensor> features{std::move(x)};
    for (auto& layer : layers_) features.push_back(layer->forward(features));
    return torch::cat(features, 1);
  }

 private:
  std::vector<DenseLayer> layers_;
};
TORCH_MODULE(DenseBlock);

class TransitionImpl : public torch::nn::Module {
 public:
  TransitionImpl(int64_t in_channels, int64_t out_channels)
      : norm_(register_module("norm", batch_norm(in_channels))),
        conv_(register_module("conv", conv(in_channels, out_channels, 1))) {}

  torch::Tensor forward(torch::Tensor x) {
    return torch::avg_pool2d(conv_(torch::relu(norm_(x))), 2, 2);
  }

 private:
  torch::nn::BatchNorm2d norm_;
  torch::nn::Conv2d conv_;
};
TORCH_MODULE(Transition);

class FeaturesImpl : public torch::nn::Module {
 public:
  FeaturesImpl()
      : conv0_(register_module("conv0", conv(3, 64, 7, 2, 3))),
        norm0_(register_module("norm0", batch_norm(64))) {
    const std::array<int64_t, 4> block_sizes{6, 12, 32, 32};
    int64_t channels = 64;
    for (std::size_t i = 0; i < block_sizes.size(); ++i) {
      blocks_.push_back(register_module("denseblock" + std::to_string(i + 1),
                                        DenseBlock(block_sizes[i], channels)));
      channels += block_sizes[i] * kGrowth;
      if (i + 1 < block_sizes.size()) {
        transitions_.push_back(register_module("transition" + std::to_string(i + 1),
                                               Transition(channels, channels / 2)));
        channels /= 2;
      }
    }
    norm5_ = register_module("norm5", batch_norm(channels));
    channels_ = channels;
  }

  torch::Tensor forward(torch::Tensor x) {
    x = torch::relu(norm0_(conv0_(x)));
    x = torch::max_pool2d(x, 3, 2, 1);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      x = blocks_[i]->forward(x);
      if (i < transitions_.size()) x = transitions_[i]->forward(x);
    }
    return norm5_(x);
  }

  int64_t channels() const { return channels_; }

 private:
  torch::nn::Conv2d conv0_;
  torch::nn::BatchNorm2d norm0_;
  std::vector<DenseBlock> blocks_;
  std::vector<Transition> transitions_;
  torch::nn::BatchNorm2d norm5_{nullptr};
  int64_t channels_ = 0;
};
TORCH_MODULE(Features);

class DenseNet final : public BackboneNet {
 public:
  DenseNet() : features_(register_module("features", Features())) {}

  torch::Tensor forward(torch::Tensor x) override {
    return torch::relu(features_->forward(x));
  }

  int64_t feature_channels() const override { return features_->channels(); }

 private:
  Features features_;
};

}  // namespace

std::shared_ptr<BackboneNet> make_densenet169() { return std::make_shared<DenseNet>(); }

}  // namespace dermabench::modelzoo::nets
