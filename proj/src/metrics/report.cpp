#include "dermabench/metrics/report.hpp"

#include "dermabench/error.hpp"
#include "dermabench/util/text_table.hpp"

namespace dermabench::metrics {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_from(const ordered_json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

MetricsReport classification_report(std::span<const SamplePrediction> samples,
                                    std::string model) {
  if (samples.empty())
    throw EvaluationError("classification report needs at least one sample");
  MetricsReport report;
  report.model = std::move(model);
  report.confusion = confusion_matrix(samples, LesionLabel::Malignant);
  report.accuracy = accuracy(report.confusion);
  for (LesionLabel label : data::kAllLabels) {
    const ConfusionMatrix cm = label == LesionLabel::Malignant
                                   ? report.confusion
                                   : report.confusion.swapped();
    report.per_class[label] = {try_precision(cm), try_recall(cm),
                               try_f1_score(cm), cm.tp + cm.fn};
  }
  return report;
}

ordered_json MetricsReport::to_json() const {
  ordered_json doc;
  doc["model"] = model;
  doc["accuracy"] = accuracy;
  ordered_json classes;
  for (LesionLabel label : data::kAllLabels) {
    const auto it = per_class.find(label);
    const ClassMetrics m = it == per_class.end() ? ClassMetrics{} : it->second;
    ordered_json item;
    item["precision"] = optional_json(m.precision);
    item["recall"] = optional_json(m.recall);
    item["f1"] = optional_json(m.f1);
    item["support"] = m.support;
    classes[std::string(data::label_name(label))] = std::move(item);
  }
  doc["per_class"] = std::move(classes);
  doc["confusion"] = {{"tp", confusion.tp},
                      {"fp", confusion.fp},
                      {"fn", confusion.fn},
                      {"tn", confusion.tn}};
  return doc;
}

MetricsReport MetricsReport::from_json(const ordered_json& doc) {
  MetricsReport report;
  report.model = doc.value("model", std::string());
  report.accuracy = doc.at("accuracy").get<double>();
  for (LesionLabel label : data::kAllLabels) {
    const auto& item = doc.at("per_class").at(std::string(data::label_name(label)));
    report.per_class[label] = {optional_from(item.at("precision")),
                               optional_from(item.at("recall")),
                               optional_from(item.at("f1")),
                               item.value("support", std::size_t{0})};
  }
  if (doc.contains("confusion")) {
    const auto& c = doc.at("confusion");
    report.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                        c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                        LesionLabel::Malignant};
  }
  return report;
}

std::string format_metric(std::optional<double> value, int decimals) {
  return value ? util::fixed(*value, decimals) : std::string("—");
}

std::string render_classification_table(std::span<const MetricsReport> reports) {
  util::TextTable table({"Model", "Class", "Precision", "Recall", "F1 Score"});
  for (const auto& report : reports) {
    bool first = true;
    for (LesionLabel label : data::kAllLabels) {
      const auto it = report.per_class.find(label);
      const ClassMetrics m = it == report.per_class.end() ? ClassMetrics{} : it->second;
      table.add_row({first ? report.model : std::string(),
                     std::string(data::label_display_name(label)),
                     format_metric(m.precision, 2), format_metric(m.recall, 2),
                     format_metric(m.f1, 2)});
      first = false;
    }
  }
  return table.render();
}

}  // namespace dermabench::metrics
