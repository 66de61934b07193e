#include "dermabench/metrics/confusion.hpp"

#include <string>

#include "dermabench/error.hpp"

namespace dermabench::metrics {

namespace {

void tally(ConfusionMatrix& cm, int truth, int predicted) {
  if ((truth != 0 && truth != 1) || (predicted != 0 && predicted != 1))
    throw DomainError("class index outside {0, 1}: (" + std::to_string(truth) +
                      ", " + std::to_string(predicted) + ")");
  const int pos = data::class_index(cm.positive);
  const bool true_pos = truth == pos;
  const bool pred_pos = predicted == pos;
  if (true_pos && pred_pos) ++cm.tp;
  else if (!true_pos && pred_pos) ++cm.fp;
  else if (true_pos) ++cm.fn;
  else ++cm.tn;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const PredictionPair> pairs,
                                 LesionLabel positive) {
  ConfusionMatrix cm;
  cm.positive = positive;
  for (const auto& p : pairs) tally(cm, p.true_index, p.predicted_index);
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const SamplePrediction> samples,
                                 LesionLabel positive) {
  ConfusionMatrix cm;
  cm.positive = positive;
  for (const auto& s : samples) tally(cm, s.true_index, s.predicted_index);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0)
    throw UndefinedMetricError("accuracy is undefined for an empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

std::optional<double> try_precision(const ConfusionMatrix& cm) noexcept {
  if (cm.tp + cm.fp == 0) return std::nullopt;
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
}

std::optional<double> try_recall(const ConfusionMatrix& cm) noexcept {
  if (cm.tp + cm.fn == 0) return std::nullopt;
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

std::optional<double> try_f1_score(const ConfusionMatrix& cm) noexcept {
  const auto p = try_precision(cm);
  const auto r = try_recall(cm);
  if (!p || !r || *p + *r == 0.0) return std::nullopt;
  return 2.0 * (*r * *p) / (*r + *p);
}

double precision(const ConfusionMatrix& cm) {
  if (auto v = try_precision(cm)) return *v;
  throw UndefinedMetricError("precision is undefined: tp + fp = 0");
}

double recall(const ConfusionMatrix& cm) {
  if (auto v = try_recall(cm)) return *v;
  throw UndefinedMetricError("recall is undefined: tp + fn = 0");
}

double f1_score(const ConfusionMatrix& cm) {
  if (auto v = try_f1_score(cm)) return *v;
  throw UndefinedMetricError(
      "f1 is undefined: precision or recall undefined, or both zero");
}

int argmax_lower_tie(std::span<const double> probabilities) noexcept {
  int best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i)
    if (probabilities[i] > probabilities[static_cast<std::size_t>(best)])
      best = static_cast<int>(i);
  return best;
}

}  // namespace dermabench::metrics
