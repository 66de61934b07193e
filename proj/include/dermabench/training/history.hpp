#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace dermabench::training {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double wall_seconds = 0.0;
  std::size_t val_samples = 0;
};

/// Per-epoch training curve.
class TrainingHistory {
 public:
  static constexpr std::string_view kCsvHeader =
      "epoch,train_loss,train_acc,val_loss,val_acc";

  TrainingHistory() = default;
  explicit TrainingHistory(std::vector<EpochRecord> records)
      : records_(std::move(records)) {}

  void append(const EpochRecord& record) { records_.push_back(record); }
  const std::vector<EpochRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const EpochRecord& back() const { return records_.back(); }

  /// One line, no trailing newline, in the CSV column order.
  static std::string csv_row(const EpochRecord& record);
  /// Header plus one row per epoch. Values use round-trip precision.
  std::string to_csv() const;
  /// Parses the CSV produced by to_csv(). Throws Error on malformed input.
  static TrainingHistory from_csv(const std::string& text);

  nlohmann::ordered_json to_json() const;
  static TrainingHistory from_json(const nlohmann::ordered_json& doc);

 private:
  std::vector<EpochRecord> records_;
};

}  // namespace dermabench::training
