#include "dermabench/data/label.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace dermabench::data {

std::optional<LesionLabel> parse_label(std::string_view name) {
  std::string lowered(name);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lowered == "benign") return LesionLabel::Benign;
  if (lowered == "malignant") return LesionLabel::Malignant;
  return std::nullopt;
}

std::optional<LesionLabel> label_from_index(int index) noexcept {
  if (index == 0) return LesionLabel::Benign;
  if (index == 1) return LesionLabel::Malignant;
  return std::nullopt;
}

}  // namespace dermabench::data
