#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dermabench/error.hpp"
#include "dermabench/training/config.hpp"
#include "dermabench/training/history.hpp"
#include "dermabench/training/run_record.hpp"
#include "dermabench/util/files.hpp"

namespace dermabench::training {

using ordered_json = nlohmann::ordered_json;

// ---- TrainConfig ---------------------------------------------------------

void TrainConfig::validate() const {
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate))
    throw ConfigError("learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

ordered_json TrainConfig::to_json() const {
  ordered_json doc;
  doc["optimizer"] = {{"name", "adam"},
                      {"learning_rate", adam.learning_rate},
                      {"beta1", adam.beta1},
                      {"beta2", adam.beta2},
                      {"epsilon", adam.epsilon}};
  doc["loss"] = std::string(kLossName);
  doc["epochs"] = epochs;
  doc["batch_size"] = batch_size;
  doc["micro_batch_size"] = micro_batch_size;
  doc["seed"] = seed;
  doc["freeze_policy"] = std::string(modelzoo::freeze_policy_name(freeze_policy));
  return doc;
}

TrainConfig TrainConfig::from_json(const ordered_json& doc) {
  TrainConfig c;
  const auto& opt = doc.at("optimizer");
  c.adam.learning_rate = opt.at("learning_rate").get<double>();
  c.adam.beta1 = opt.value("beta1", c.adam.beta1);
  c.adam.beta2 = opt.value("beta2", c.adam.beta2);
  c.adam.epsilon = opt.value("epsilon", c.adam.epsilon);
  c.epochs = doc.at("epochs").get<int>();
  c.batch_size = doc.at("batch_size").get<std::size_t>();
  c.micro_batch_size = doc.value("micro_batch_size", std::size_t{0});
  c.seed = doc.value("seed", std::uint64_t{0});
  c.freeze_policy =
      modelzoo::parse_freeze_policy(doc.value("freeze_policy", std::string("full")));
  return c;
}

std::string TrainConfig::fingerprint() const {
  return util::to_hex(util::fnv1a64(to_json().dump()));
}

// ---- TrainingHistory -----------------------------------------------------

namespace {

std::string round_trip(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error("malformed number in history CSV: '" + std::string(field) + "'");
  return v;
}

}  // namespace

std::string TrainingHistory::csv_row(const EpochRecord& r) {
  return std::to_string(r.epoch) + "," + round_trip(r.train_loss) + "," +
         round_trip(r.train_accuracy) + "," + round_trip(r.val_loss) + "," +
         round_trip(r.val_accuracy);
}

std::string TrainingHistory::to_csv() const {
  std::string out(kCsvHeader);
  out += "\n";
  for (const auto& r : records_) out += csv_row(r) + "\n";
  return out;
}

TrainingHistory TrainingHistory::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw Error("history CSV must start with '" + std::string(kCsvHeader) + "'");
  TrainingHistory history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5)
      throw Error("history CSV row needs 5 fields: '" + line + "'");
    EpochRecord r;
    r.epoch = static_cast<int>(parse_double(fields[0]));
    r.train_loss = parse_double(fields[1]);
    r.train_accuracy = parse_double(fields[2]);
    r.val_loss = parse_double(fields[3]);
    r.val_accuracy = parse_double(fields[4]);
    history.append(r);
  }
  return history;
}

ordered_json TrainingHistory::to_json() const {
  auto arr = ordered_json::array();
  for (const auto& r : records_)
    arr.push_back({{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"train_accuracy", r.train_accuracy},
                   {"val_loss", r.val_loss},
                   {"val_accuracy", r.val_accuracy},
                   {"val_samples", r.val_samples},
                   {"wall_seconds", r.wall_seconds}});
  return arr;
}

TrainingHistory TrainingHistory::from_json(const ordered_json& doc) {
  TrainingHistory history;
  for (const auto& item : doc) {
    EpochRecord r;
    r.epoch = item.at("epoch").get<int>();
    r.train_loss = item.at("train_loss").get<double>();
    r.train_accuracy = item.at("train_accuracy").get<double>();
    r.val_loss = item.at("val_loss").get<double>();
    r.val_accuracy = item.at("val_accuracy").get<double>();
    r.val_samples = item.value("val_samples", std::size_t{0});
    r.wall_seconds = item.value("wall_seconds", 0.0);
    history.append(r);
  }
  return history;
}

// ---- RunRecord -----------------------------------------------------------

ordered_json augmentation_to_json(const data::AugmentationConfig& config) {
  return {{"zoom_range", config.zoom_range},
          {"rotation_range", config.rotation_range},
          {"horizontal_flip", config.horizontal_flip},
          {"vertical_flip", config.vertical_flip}};
}

data::AugmentationConfig augmentation_from_json(const ordered_json& doc) {
  data::AugmentationConfig c;
  c.zoom_range = doc.value("zoom_range", 0.0);
  c.rotation_range = doc.value("rotation_range", 0.0);
  c.horizontal_flip = doc.value("horizontal_flip", false);
  c.vertical_flip = doc.value("vertical_flip", false);
  return c;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_number(const ordered_json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<double>();
}

}  // namespace

ordered_json RunRecord::to_json() const {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["backbone"] = backbone;
  doc["model_name"] = model_name;
  doc["backbone_variant"] = backbone_variant;
  doc["weights"] = weights;
  doc["train_config"] = train_config.to_json();
  doc["augmentation"] = augmentation_to_json(augmentation);
  doc["data"] = {{"manifest_fingerprint", manifest_fingerprint},
                 {"train_samples", train_samples},
                 {"validation_samples", validation_samples}};
  doc["history"] = history.to_json();
  doc["final_validation"] = {{"loss", optional_number(final_validation_loss)},
                             {"accuracy", optional_number(final_validation_accuracy)}};
  if (test_evaluation) {
    doc["test_evaluation"] = {{"loss", test_evaluation->loss},
                              {"accuracy", test_evaluation->accuracy},
                              {"samples", test_evaluation->samples},
                              {"metrics", test_evaluation->report.to_json()}};
  } else {
    doc["test_evaluation"] = nullptr;
  }
  doc["checkpoint"] = checkpoint_path;
  doc["holdout_note"] = holdout_note;
  doc["environment_note"] = environment_note;
  doc["created_at"] = created_at;
  return doc;
}

RunRecord RunRecord::from_json(const ordered_json& doc) {
  try {
    if (doc.value("format_version", 0) != kFormatVersion)
      throw Error("unsupported run record format_version");
    RunRecord r;
    r.backbone = doc.at("backbone").get<std::string>();
    r.model_name = doc.value("model_name", r.backbone);
    r.backbone_variant = doc.value("backbone_variant", std::string());
    r.weights = doc.value("weights", std::string());
    r.train_config = TrainConfig::from_json(doc.at("train_config"));
    if (doc.contains("augmentation"))
      r.augmentation = augmentation_from_json(doc.at("augmentation"));
    if (doc.contains("data")) {
      const auto& d = doc.at("data");
      r.manifest_fingerprint = d.value("manifest_fingerprint", std::string());
      r.train_samples = d.value("train_samples", std::size_t{0});
      r.validation_samples = d.value("validation_samples", std::size_t{0});
    }
    r.history = TrainingHistory::from_json(doc.at("history"));
    if (doc.contains("final_validation")) {
      r.final_validation_loss = optional_number(doc.at("final_validation"), "loss");
      r.final_validation_accuracy = optional_number(doc.at("final_validation"), "accuracy");
    }
    if (doc.contains("test_evaluation") && !doc.at("test_evaluation").is_null()) {
      const auto& t = doc.at("test_evaluation");
      EvaluationSummary s;
      s.loss = t.at("loss").get<double>();
      s.accuracy = t.at("accuracy").get<double>();
      s.samples = t.value("samples", std::size_t{0});
      s.report = metrics::MetricsReport::from_json(t.at("metrics"));
      r.test_evaluation = std::move(s);
    }
    r.checkpoint_path = doc.value("checkpoint", std::string());
    r.holdout_note = doc.value("holdout_note", std::string());
    r.environment_note = doc.value("environment_note", std::string());
    r.created_at = doc.value("created_at", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid run record: ") + e.what());
  }
}

void RunRecord::save(const std::filesystem::path& path) const {
  util::write_file_atomic(path, to_json().dump(2) + "\n");
}

RunRecord RunRecord::load(const std::filesystem::path& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(util::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed run record " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::string RunRecord::file_stem(const std::string& timestamp) const {
  return "run-" + backbone + "-" + std::to_string(train_config.seed) + "-" + timestamp;
}

}  // namespace dermabench::training
