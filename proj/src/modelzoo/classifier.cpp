#include "dermabench/modelzoo/classifier.hpp"

#include <cmath>
#include <cstdlib>

#include <ATen/CPUGeneratorImpl.h>

#include "dermabench/error.hpp"
#include "dermabench/modelzoo/checkpoint.hpp"
#include "modelzoo/nets/nets.hpp"

namespace dermabench::modelzoo {

namespace fs = std::filesystem;

std::shared_ptr<BackboneNet> make_backbone(BackboneId id) {
  switch (id) {
    case BackboneId::ResNet101: return nets::make_resnet101();
    case BackboneId::DenseNet169: return nets::make_densenet169();
    case BackboneId::EfficientNet: return nets::make_efficientnet_b0();
    case BackboneId::InceptionV3: return nets::make_inception_v3();
  }
  throw ConfigError("unknown backbone");
}

fs::path weight_cache_dir(const std::optional<fs::path>& override_dir) {
  if (override_dir) return *override_dir;
  if (const char* env = std::getenv("DERMABENCH_CACHE"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".cache" / "dermabench";
  return fs::current_path() / ".dermabench-cache";
}

fs::path pretrained_weight_path(BackboneId id, const fs::path& cache_dir) {
  return cache_dir / (std::string(backbone_key(id)) + ".dbw");
}

std::vector<std::pair<std::string, torch::Tensor>> named_state(torch::nn::Module& module) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& item : module.named_parameters(true)) out.emplace_back(item.key(), item.value());
  for (const auto& item : module.named_buffers(true)) out.emplace_back(item.key(), item.value());
  return out;
}

namespace {

at::Generator seeded_generator(std::uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

// He-normal (fan_out) for convolutions, unit scale / zero shift for batch
// norm, zero biases.
void init_backbone(torch::nn::Module& backbone, std::uint64_t seed) {
  at::Generator gen = seeded_generator(seed ^ 0x9e3779b97f4a7c15ULL);
  torch::NoGradGuard no_grad;
  for (const auto& item : backbone.named_modules()) {
    torch::nn::Module& m = *item.value();
    if (auto* c = m.as<torch::nn::Conv2d>()) {
      const auto& w = c->weight;
      const double fan_out = static_cast<double>(w.size(0) * w.size(2) * w.size(3));
      w.normal_(0.0, std::sqrt(2.0 / fan_out), gen);
      if (c->bias.defined()) c->bias.zero_();
    } else if (auto* bn = m.as<torch::nn::BatchNorm2d>()) {
      bn->weight.fill_(1.0);
      bn->bias.zero_();
      bn->running_mean.zero_();
      bn->running_var.fill_(1.0);
      bn->num_batches_tracked.zero_();
    } else if (auto* fc = m.as<torch::nn::Linear>()) {
      const double bound = std::sqrt(6.0 / static_cast<double>(fc->weight.size(0) + fc->weight.size(1)));
      fc->weight.uniform_(-bound, bound, gen);
      if (fc->bias.defined()) fc->bias.zero_();
    }
  }
}

void init_head(torch::nn::Linear& head, std::uint64_t seed) {
  at::Generator gen = seeded_generator(seed);
  torch::NoGradGuard no_grad;
  const double bound =
      std::sqrt(6.0 / static_cast<double>(head->weight.size(0) + head->weight.size(1)));
  head->weight.uniform_(-bound, bound, gen);
  head->bias.zero_();
}

}  // namespace

ClassifierModelImpl::ClassifierModelImpl(BackboneId id, FreezePolicy freeze_policy,
                                         std::uint64_t head_seed, WeightSource weights)
    : id_(id),
      freeze_policy_(freeze_policy),
      head_seed_(head_seed),
      weight_source_(weights),
      preprocessing_(preprocessing_for(id)) {
  backbone_ = register_module("backbone", make_backbone(id));
  head_ = register_module("head", torch::nn::Linear(backbone_->feature_channels(), 2));
  init_backbone(*backbone_, head_seed);
  init_head(head_, head_seed);
  apply_freeze_policy();
}

void ClassifierModelImpl::apply_freeze_policy() {
  const bool trainable = freeze_policy_ == FreezePolicy::FullFineTune;
  for (auto& p : backbone_->parameters()) p.set_requires_grad(trainable);
  if (!trainable) backbone_->eval();
}

void ClassifierModelImpl::train(bool on) {
  torch::nn::Module::train(on);
  if (freeze_policy_ == FreezePolicy::FrozenBackbone) backbone_->eval();
}

torch::Tensor ClassifierModelImpl::logits(const torch::Tensor& nhwc) {
  if (nhwc.dim() != 4 || nhwc.size(3) != 3)
    throw ConfigError("classifier input must be (N, H, W, 3)");
  torch::Tensor features = backbone_->forward(nhwc.permute({0, 3, 1, 2}).contiguous());
  return head_->forward(features.mean({2, 3}));
}

torch::Tensor ClassifierModelImpl::forward(const torch::Tensor& nhwc) {
  return torch::softmax(logits(nhwc), 1);
}

torch::Tensor ClassifierModelImpl::predict(std::span<const data::ImageTensor> images) {
  const bool was_training = is_training();
  eval();
  torch::NoGradGuard no_grad;
  torch::Tensor probs = forward(apply_preprocessing(images_to_tensor(images), preprocessing_));
  if (was_training) train(true);
  return probs;
}

int64_t ClassifierModelImpl::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : parameters()) n += p.numel();
  return n;
}

int64_t ClassifierModelImpl::trainable_parameter_count() const {
  int64_t n = 0;
  for (const auto& p : parameters())
    if (p.requires_grad()) n += p.numel();
  return n;
}

ClassifierModel build_model(BackboneId id, const ModelOptions& options) {
  ClassifierModel model(id, options.freeze_policy, options.head_seed, options.weights);
  if (options.weights == WeightSource::Pretrained) {
    const fs::path file = pretrained_weight_path(id, weight_cache_dir(options.cache_dir));
    if (!fs::exists(file))
      throw AcquisitionError("pretrained weights for " + std::string(backbone_display_name(id)) +
                             " not found at " + file.string() +
                             " (populate the cache with tools/convert_torchvision_weights.py "
                             "or set DERMABENCH_CACHE)");
    container::Contents contents;
    try {
      contents = container::read(file);
    } catch (const CheckpointError& e) {
      throw AcquisitionError("unreadable pretrained weights for " +
                             std::string(backbone_display_name(id)) + ": " + e.what());
    }
    if (contents.metadata.value("backbone_id", std::string()) != backbone_key(id))
      throw AcquisitionError("weight file " + file.string() + " is for backbone '" +
                             contents.metadata.value("backbone_id", std::string()) + "'");
    try {
      load_named_state(model->backbone(), contents.tensors, "weights " + file.string());
    } catch (const CheckpointError& e) {
      throw AcquisitionError(e.what());
    }
  }
  model->train(true);
  return model;
}

}  // namespace dermabench::modelzoo
