#pragma once

#include <array>
#include <ostream>
#include <string>
#include <string_view>

namespace dermabench::modelzoo {

enum class BackboneId { ResNet101, DenseNet169, EfficientNet, InceptionV3 };

inline constexpr std::array<BackboneId, 4> kAllBackbones{
    BackboneId::ResNet101, BackboneId::DenseNet169, BackboneId::EfficientNet,
    BackboneId::InceptionV3};

/// Command-line / file-name key: resnet101, densenet169, efficientnet,
/// inceptionv3.
std::string_view backbone_key(BackboneId id) noexcept;

inline std::ostream& operator<<(std::ostream& os, BackboneId id) { return os << backbone_key(id); }

/// Report name: ResNet101, DenseNet169, EfficientNet, InceptionV3.
std::string_view backbone_display_name(BackboneId id) noexcept;

/// Concrete architecture variant, e.g. "EfficientNet-B0".
std::string_view backbone_variant(BackboneId id) noexcept;

/// Case-insensitive; also accepts a few common spellings
/// ("efficientnet-b0", "inception_v3"). Throws ConfigError listing the valid
/// names.
BackboneId parse_backbone(std::string_view name);

/// "resnet101, densenet169, efficientnet, inceptionv3"
std::string valid_backbone_names();

enum class FreezePolicy { FullFineTune, FrozenBackbone };

std::string_view freeze_policy_name(FreezePolicy policy) noexcept;
FreezePolicy parse_freeze_policy(std::string_view name);

/// Where backbone parameters come from.
enum class WeightSource {
  Pretrained,  // local weight cache, AcquisitionError when absent
  Random,      // seeded He initialisation; for smoke tests only
};

std::string_view weight_source_name(WeightSource source) noexcept;
WeightSource parse_weight_source(std::string_view name);

}  // namespace dermabench::modelzoo
