#include "dermabench/metrics/comparison.hpp"

#include <array>
#include <map>

#include "dermabench/error.hpp"
#include "dermabench/util/text_table.hpp"

namespace dermabench::metrics {

namespace {

const std::array<LiteratureRow, 13> kPriorWork{{
    {"In study [13]", "ResNet 50", 0.785},
    {"In study [13]", "ResNet 40", 0.835},
    {"In study [13]", "ResNet 25", 0.807},
    {"In study [13]", "ResNet 10", 0.822},
    {"In study [13]", "ResNet 7", 0.824},
    {"In study [14]", "AlexNet", 0.735},
    {"In study [15]", "VGG16", 0.726},
    {"In study [16]", "ResNet 101", 0.890},
    {"In study [16]", "InceptionV3", 0.900},
    {"In study [17]", "ResNet 50", 0.933},
    {"In study [17]", "Xception", 0.952},
    {"In study [17]", "VGG16", 0.931},
    {"In study [17]", "Inception V3", 0.941},
}};

std::string cell(const std::optional<double>& v, int decimals) {
  return v ? util::fixed(*v, decimals) : std::string("—");
}

std::string csv_cell(const std::optional<double>& v) {
  return v ? util::fixed(*v, 4) : std::string();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::span<const LiteratureRow> prior_work_fixture() noexcept { return kPriorWork; }

ComparisonTable comparison_table(std::span<const training::RunRecord> records,
                                 bool with_literature) {
  if (records.empty()) throw ConfigError("comparison needs at least one run record");
  ComparisonTable table;
  std::map<std::string, int> name_counts;
  for (const auto& r : records) ++name_counts[r.model_name];

  for (const auto& r : records) {
    ComparisonRow row;
    row.model = r.model_name;
    row.seed = r.train_config.seed;
    if (name_counts[r.model_name] > 1) {
      row.model += " (seed " + std::to_string(row.seed) + ")";
      table.warnings.push_back("duplicate model name '" + r.model_name +
                               "' disambiguated as '" + row.model + "'");
    }
    row.validation_accuracy = r.final_validation_accuracy;
    row.validation_loss = r.final_validation_loss;
    if (r.test_evaluation) {
      row.test_accuracy = r.test_evaluation->accuracy;
      row.report = r.test_evaluation->report;
      row.report->model = row.model;
    }
    table.rows.push_back(std::move(row));
  }
  if (with_literature) table.literature.assign(kPriorWork.begin(), kPriorWork.end());
  return table;
}

std::string ComparisonTable::render_text() const {
  std::string out = "Validation accuracy and loss\n";
  util::TextTable validation({"Model", "Validation Accuracy", "Validation Loss"});
  for (const auto& row : rows)
    validation.add_row({row.model, cell(row.validation_accuracy, 4),
                        cell(row.validation_loss, 4)});
  out += validation.render();

  out += "\nTest set accuracy\n";
  util::TextTable test({"Model", "Test Accuracy"});
  for (const auto& row : rows) test.add_row({row.model, cell(row.test_accuracy, 4)});
  out += test.render();

  std::vector<MetricsReport> reports;
  for (const auto& row : rows)
    if (row.report) reports.push_back(*row.report);
  if (!reports.empty()) {
    out += "\nPer-class precision, recall and F1 (test set)\n";
    out += render_classification_table(reports);
  }

  if (!literature.empty()) {
    out += "\nPrior work (published values, not recomputed)\n";
    util::TextTable lit({"Reference", "Architecture", "Validation Acc"});
    std::string previous;
    for (const auto& l : literature) {
      lit.add_row({l.study == previous ? std::string() : l.study, l.architecture,
                   util::fixed(l.accuracy, 3)});
      previous = l.study;
    }
    out += lit.render();
  }
  return out;
}

std::string ComparisonTable::render_csv() const {
  std::string out = "source,model,seed,validation_accuracy,validation_loss,test_accuracy\n";
  for (const auto& row : rows)
    out += "run," + csv_escape(row.model) + "," + std::to_string(row.seed) + "," +
           csv_cell(row.validation_accuracy) + "," + csv_cell(row.validation_loss) + "," +
           csv_cell(row.test_accuracy) + "\n";
  for (const auto& l : literature)
    out += csv_escape("literature " + l.study) + "," + csv_escape(l.architecture) + ",,," +
           "," + util::fixed(l.accuracy, 3) + "\n";
  return out;
}

}  // namespace dermabench::metrics
