#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "dermabench/data/label.hpp"

namespace dermabench::metrics {

using data::LesionLabel;

/// (true class index, predicted class index), both in {0, 1}.
struct PredictionPair {
  int true_index;
  int predicted_index;
};

/// One evaluated sample.
struct SamplePrediction {
  int true_index;
  int predicted_index;
  std::array<double, 2> probabilities;
};

/// Binary confusion counts relative to `positive`.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  LesionLabel positive = LesionLabel::Malignant;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  /// Same counts seen with the other class as positive.
  ConfusionMatrix swapped() const noexcept {
    return {tn, fn, fp, tp,
            positive == LesionLabel::Malignant ? LesionLabel::Benign
                                               : LesionLabel::Malignant};
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws DomainError on an index outside {0, 1}.
ConfusionMatrix confusion_matrix(std::span<const PredictionPair> pairs,
                                 LesionLabel positive = LesionLabel::Malignant);
ConfusionMatrix confusion_matrix(std::span<const SamplePrediction> samples,
                                 LesionLabel positive = LesionLabel::Malignant);

// The four metrics throw UndefinedMetricError when their denominator is 0.

/// (tp + tn) / total
double accuracy(const ConfusionMatrix& cm);
/// tp / (tp + fp)
double precision(const ConfusionMatrix& cm);
/// tp / (tp + fn)
double recall(const ConfusionMatrix& cm);
/// 2 * precision * recall / (precision + recall)
double f1_score(const ConfusionMatrix& cm);

// Non-throwing variants; nullopt marks an undefined value.
std::optional<double> try_precision(const ConfusionMatrix& cm) noexcept;
std::optional<double> try_recall(const ConfusionMatrix& cm) noexcept;
std::optional<double> try_f1_score(const ConfusionMatrix& cm) noexcept;

/// Index of the larger probability; ties go to the lower index.
int argmax_lower_tie(std::span<const double> probabilities) noexcept;

}  // namespace dermabench::metrics
