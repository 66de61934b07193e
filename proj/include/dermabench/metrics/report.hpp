#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "dermabench/metrics/confusion.hpp"

namespace dermabench::metrics {

/// nullopt marks an undefined value (zero denominator).
struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t support = 0;
};

/// Per-class precision/recall/F1 plus overall accuracy. Values are stored
/// at full precision and rounded only when rendered.
struct MetricsReport {
  std::string model;
  double accuracy = 0.0;
  std::map<LesionLabel, ClassMetrics> per_class;
  ConfusionMatrix confusion;  // malignant as positive

  /// {model, accuracy, per_class: {benign: {...}, malignant: {...}},
  ///  confusion: {tp, fp, fn, tn}}; undefined values are null.
  nlohmann::ordered_json to_json() const;
  static MetricsReport from_json(const nlohmann::ordered_json& doc);
};

/// Each class is treated in turn as the positive class. Throws
/// EvaluationError on empty input.
MetricsReport classification_report(std::span<const SamplePrediction> samples,
                                    std::string model = {});

/// Fixed-decimal rendering; an undefined value renders as an em dash.
std::string format_metric(std::optional<double> value, int decimals);

/// Plain-text per-class table: Model | Class | Precision | Recall | F1 Score,
/// two decimals.
std::string render_classification_table(std::span<const MetricsReport> reports);

}  // namespace dermabench::metrics
