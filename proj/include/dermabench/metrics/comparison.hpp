#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dermabench/metrics/report.hpp"
#include "dermabench/training/run_record.hpp"

namespace dermabench::metrics {

/// Published accuracy of an earlier study. Literature value, shipped as
/// data and never recomputed.
struct LiteratureRow {
  std::string study;         // e.g. "In study [13]"
  std::string architecture;  // e.g. "ResNet 50"
  double accuracy;
};

/// The published prior-work accuracies used for the comparison report.
std::span<const LiteratureRow> prior_work_fixture() noexcept;

struct ComparisonRow {
  std::string model;  // disambiguated with the seed when names repeat
  std::uint64_t seed = 0;
  std::optional<double> validation_accuracy;
  std::optional<double> validation_loss;
  std::optional<double> test_accuracy;
  std::optional<MetricsReport> report;
};

/// One row per run record, values copied from the records.
struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<LiteratureRow> literature;
  std::vector<std::string> warnings;

  /// Validation table, test-accuracy table, per-class table and, when
  /// present, the literature table. Four decimals for accuracies and
  /// losses, two for per-class metrics.
  std::string render_text() const;
  /// source,model,seed,validation_accuracy,validation_loss,test_accuracy
  std::string render_csv() const;
};

/// Throws ConfigError when `records` is empty.
ComparisonTable comparison_table(std::span<const training::RunRecord> records,
                                 bool with_literature = false);

}  // namespace dermabench::metrics
