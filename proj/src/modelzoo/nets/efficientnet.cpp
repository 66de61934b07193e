// EfficientNet-B0 (width and depth multipliers 1.0).

#include <vector>

#include "nets.hpp"

namespace dermabench::modelzoo::nets {

namespace {

// Sequential with a concrete forward signature, so chains can nest.
class ChainImpl : public torch::nn::SequentialImpl {
 public:
  torch::Tensor forward(torch::Tensor x) { return torch::nn::SequentialImpl::forward(std::move(x)); }
};
TORCH_MODULE(Chain);

// Conv -> BN -> optional SiLU; parameters are named "<i>.0.weight" /
// "<i>.1.weight".
Chain conv_norm_act(int64_t in, int64_t out, int64_t kernel, int64_t stride = 1,
                    int64_t groups = 1, bool activation = true) {
  Chain seq;
  seq->push_back(conv(in, out, kernel, stride, (kernel - 1) / 2, groups));
  seq->push_back(batch_norm(out));
  if (activation) seq->push_back(torch::nn::SiLU());
  return seq;
}

class SqueezeExcitationImpl : public torch::nn::Module {
 public:
  SqueezeExcitationImpl(int64_t channels, int64_t squeeze)
      : fc1_(register_module("fc1", conv(channels, squeeze, 1, 1, 0, 1, true))),
        fc2_(register_module("fc2", conv(squeeze, channels, 1, 1, 0, 1, true))) {}

  torch::Tensor forward(torch::Tensor x) {
    torch::Tensor scale = torch::adaptive_avg_pool2d(x, {1, 1});
    scale = torch::sigmoid(fc2_(torch::silu(fc1_(scale))));
    return scale * x;
  }

 private:
  torch::nn::Conv2d fc1_;
  torch::nn::Conv2d fc2_;
};
TORCH_MODULE(SqueezeExcitation);

class MBConvImpl : public torch::nn::Module {
 public:
  MBConvImpl(int64_t expand_ratio, int64_t kernel, int64_t stride, int64_t in, int64_t out,
             double drop_probability)
      : residual_(stride == 1 && in == out), drop_probability_(drop_probability) {
    const int64_t expanded = in * expand_ratio;
    Chain block;
    if (expanded != in) block->push_back(conv_norm_act(in, expanded, 1));
    block->push_back(conv_norm_act(expanded, expanded, kernel, stride, expanded));
    block->push_back(SqueezeExcitation(expanded, std::max<int64_t>(1, in / 4)));
    block->push_back(conv_norm_act(expanded, out, 1, 1, 1, false));
    block_ = register_module("block", block);
  }

  torch::Tensor forward(torch::Tensor x) {
    torch::Tensor result = block_->forward(x);
    if (!residual_) return result;
    if (is_training() && drop_probability_ > 0.0) {
      // Stochastic depth: drop the residual branch per sample.
      const double survival = 1.0 - drop_probability_;
      torch::Tensor keep =
          torch::empty({result.size(0), 1, 1, 1}, result.options()).bernoulli_(survival);
      result = result * keep / survival;
    }
    return result + x;
  }

 private:
  Chain block_{nullptr};
  bool residual_;
  double drop_probability_;
};
TORCH_MODULE(MBConv);

struct StageConfig {
  int64_t expand_ratio, kernel, stride, in, out, layers;
};

class EfficientNet final : public BackboneNet {
 public:
  EfficientNet() {
    constexpr std::array<StageConfig, 7> kStages{{{1, 3, 1, 32, 16, 1},
                                                  {6, 3, 2, 16, 24, 2},
                                                  {6, 5, 2, 24, 40, 2},
                                                  {6, 3, 2, 40, 80, 3},
                                                  {6, 5, 1, 80, 112, 3},
                                                  {6, 5, 2, 112, 192, 4},
                                                  {6, 3, 1, 192, 320, 1}}};
    constexpr double kStochasticDepth = 0.2;
    int64_t total_blocks = 0;
    for (const auto& s : kStages) total_blocks += s.layers;

    Chain features;
    features->push_back(conv_norm_act(3, 32, 3, 2));
    int64_t block_id = 0;
    for (const auto& s : kStages) {
      Chain stage;
      for (int64_t i = 0; i < s.layers; ++i) {
        const double drop = kStochasticDepth * static_cast<double>(block_id) /
                            static_cast<double>(total_blocks);
        stage->push_back(MBConv(s.expand_ratio, s.kernel, i == 0 ? s.stride : 1,
                                i == 0 ? s.in : s.out, s.out, drop));
        ++block_id;
      }
      features->push_back(stage);
    }
    features->push_back(conv_norm_act(320, 1280, 1));
    features_ = register_module("features", features);
  }

  torch::Tensor forward(torch::Tensor x) override { return features_->forward(x); }
  int64_t feature_channels() const override { return 1280; }

 private:
  Chain features_{nullptr};
};

}  // namespace

std::shared_ptr<BackboneNet> make_efficientnet_b0() { return std::make_shared<EfficientNet>(); }

}  // namespace dermabench::modelzoo::nets
