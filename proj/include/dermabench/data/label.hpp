#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace dermabench::data {

/// The two lesion classes. The enumerator values are the class indices used
/// throughout training and evaluation.
enum class LesionLabel : int { Benign = 0, Malignant = 1 };

inline constexpr std::array<LesionLabel, 2> kAllLabels{LesionLabel::Benign,
                                                       LesionLabel::Malignant};
inline constexpr int kNumClasses = 2;

struct EncodedLabel {
  int class_index;
  std::array<float, 2> one_hot;
};

constexpr EncodedLabel encode_label(LesionLabel label) noexcept {
  return label == LesionLabel::Benign ? EncodedLabel{0, {1.0F, 0.0F}}
                                      : EncodedLabel{1, {0.0F, 1.0F}};
}

constexpr int class_index(LesionLabel label) noexcept {
  return static_cast<int>(label);
}

/// Directory / JSON name: "benign" or "malignant".
constexpr std::string_view label_name(LesionLabel label) noexcept {
  return label == LesionLabel::Benign ? "benign" : "malignant";
}

/// "Benign" / "Malignant", used in rendered reports.
constexpr std::string_view label_display_name(LesionLabel label) noexcept {
  return label == LesionLabel::Benign ? "Benign" : "Malignant";
}

std::optional<LesionLabel> parse_label(std::string_view name);
std::optional<LesionLabel> label_from_index(int index) noexcept;

}  // namespace dermabench::data
