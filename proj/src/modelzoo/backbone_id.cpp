#include "dermabench/modelzoo/backbone_id.hpp"

#include <algorithm>
#include <cctype>

#include "dermabench/error.hpp"

namespace dermabench::modelzoo {

namespace {

std::string normalise(std::string_view name) {
  std::string out;
  for (unsigned char c : name)
    if (c != '-' && c != '_' && c != ' ') out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

}  // namespace

std::string_view backbone_key(BackboneId id) noexcept {
  switch (id) {
    case BackboneId::ResNet101: return "resnet101";
    case BackboneId::DenseNet169: return "densenet169";
    case BackboneId::EfficientNet: return "efficientnet";
    case BackboneId::InceptionV3: return "inceptionv3";
  }
  return "";
}

std::string_view backbone_display_name(BackboneId id) noexcept {
  switch (id) {
    case BackboneId::ResNet101: return "ResNet101";
    case BackboneId::DenseNet169: return "DenseNet169";
    case BackboneId::EfficientNet: return "EfficientNet";
    case BackboneId::InceptionV3: return "InceptionV3";
  }
  return "";
}

std::string_view backbone_variant(BackboneId id) noexcept {
  switch (id) {
    case BackboneId::ResNet101: return "ResNet-101 (v1.5)";
    case BackboneId::DenseNet169: return "DenseNet-169";
    case BackboneId::EfficientNet: return "EfficientNet-B0";
    case BackboneId::InceptionV3: return "Inception-v3 (no auxiliary head)";
  }
  return "";
}

std::string valid_backbone_names() {
  std::string out;
  for (BackboneId id : kAllBackbones) {
    if (!out.empty()) out += ", ";
    out += backbone_key(id);
  }
  return out;
}

BackboneId parse_backbone(std::string_view name) {
  const std::string key = normalise(name);
  for (BackboneId id : kAllBackbones)
    if (key == backbone_key(id)) return id;
  if (key == "efficientnetb0") return BackboneId::EfficientNet;
  if (key == "densenet") return BackboneId::DenseNet169;
  throw ConfigError("unknown backbone '" + std::string(name) +
                    "'; valid names: " + valid_backbone_names());
}

std::string_view freeze_policy_name(FreezePolicy policy) noexcept {
  return policy == FreezePolicy::FullFineTune ? "full" : "frozen";
}

FreezePolicy parse_freeze_policy(std::string_view name) {
  const std::string key = normalise(name);
  if (key == "full" || key == "fullfinetune") return FreezePolicy::FullFineTune;
  if (key == "frozen" || key == "frozenbackbone") return FreezePolicy::FrozenBackbone;
  throw ConfigError("unknown freeze policy '" + std::string(name) +
                    "'; valid values: full, frozen");
}

std::string_view weight_source_name(WeightSource source) noexcept {
  return source == WeightSource::Pretrained ? "pretrained" : "random";
}

WeightSource parse_weight_source(std::string_view name) {
  const std::string key = normalise(name);
  if (key == "pretrained") return WeightSource::Pretrained;
  if (key == "random") return WeightSource::Random;
  throw ConfigError("unknown weight source '" + std::string(name) +
                    "'; valid values: pretrained, random");
}

}  // namespace dermabench::modelzoo
