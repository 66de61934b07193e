#include "dermabench/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dermabench/error.hpp"

namespace dermabench::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "data.root",           "data.train_fraction",          "data.seed",
      "data.workers",        "augmentation.zoom_range",      "augmentation.rotation_range",
      "augmentation.horizontal_flip", "augmentation.vertical_flip", "training.learning_rate",
      "training.beta_1",     "training.beta_2",              "training.epsilon",
      "training.epochs",     "training.batch_size",          "training.micro_batch_size",
      "training.freeze_policy", "models.backbones",          "models.weights",
      "models.cache_dir",    "output.dir"};
  return keys;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(key + ": '" + text + "' is not a number");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError(key + ": '" + text + "' is not a non-negative integer");
  return v;
}

bool to_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), ::tolower);
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ConfigError(key + ": '" + text + "' is not a boolean");
}

std::string join_backbones(const std::vector<modelzoo::BackboneId>& ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out += ",";
    out += modelzoo::backbone_key(id);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::vector<modelzoo::BackboneId> parse_backbone_list(const std::string& text) {
  std::vector<modelzoo::BackboneId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto id = modelzoo::parse_backbone(item);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  if (out.empty()) throw ConfigError("backbone list is empty; valid names: " +
                                     modelzoo::valid_backbone_names());
  return out;
}

void set_value(CliConfig& c, const std::string& key, const std::string& raw,
               const std::string& origin) {
  const std::string value = trim(raw);
  if (key == "data.root") c.dataset_root = fs::path(value);
  else if (key == "data.train_fraction") c.train_fraction = to_double(key, value);
  else if (key == "data.seed") c.seed = c.training.seed = to_uint(key, value);
  else if (key == "data.workers") {
    const auto w = to_uint(key, value);
    if (w < 1 || w > 256) throw ConfigError("data.workers must be between 1 and 256");
    c.workers = static_cast<unsigned>(w);
  } else if (key == "augmentation.zoom_range") c.augmentation.zoom_range = to_double(key, value);
  else if (key == "augmentation.rotation_range")
    c.augmentation.rotation_range = to_double(key, value);
  else if (key == "augmentation.horizontal_flip")
    c.augmentation.horizontal_flip = to_bool(key, value);
  else if (key == "augmentation.vertical_flip") c.augmentation.vertical_flip = to_bool(key, value);
  else if (key == "training.learning_rate") c.training.adam.learning_rate = to_double(key, value);
  else if (key == "training.beta_1") c.training.adam.beta1 = to_double(key, value);
  else if (key == "training.beta_2") c.training.adam.beta2 = to_double(key, value);
  else if (key == "training.epsilon") c.training.adam.epsilon = to_double(key, value);
  else if (key == "training.epochs") {
    const auto e = to_uint(key, value);
    if (e > 100000) throw ConfigError("training.epochs is unreasonably large");
    c.training.epochs = static_cast<int>(e);
  } else if (key == "training.batch_size") c.training.batch_size = to_uint(key, value);
  else if (key == "training.micro_batch_size") c.training.micro_batch_size = to_uint(key, value);
  else if (key == "training.freeze_policy")
    c.training.freeze_policy = modelzoo::parse_freeze_policy(value);
  else if (key == "models.backbones") c.backbones = parse_backbone_list(value);
  else if (key == "models.weights") c.weights = modelzoo::parse_weight_source(value);
  else if (key == "models.cache_dir") c.cache_dir = fs::path(value);
  else if (key == "output.dir") c.output_dir = fs::path(value);
  else throw ConfigError("unknown configuration key '" + key + "'");
  c.origin[key] = origin;
}

CliConfig load_config(const std::optional<fs::path>& file) {
  CliConfig c;
  for (const auto& key : known_keys()) c.origin[key] = "default";
  if (!file) return c;
  if (!fs::is_regular_file(*file)) throw ConfigError("config file not found: " + file->string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(file->string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot parse config file " + file->string() + ": " + e.what());
  }
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty())
      throw ConfigError("config key '" + section + "' must live in a section");
    for (const auto& [name, node] : entries)
      set_value(c, section + "." + name, node.get_value<std::string>(), "file");
  }
  return c;
}

ordered_json CliConfig::to_json() const {
  auto with_origin = [&](const std::string& key, ordered_json value) {
    auto it = origin.find(key);
    return ordered_json{{"value", std::move(value)},
                        {"origin", it == origin.end() ? "default" : it->second}};
  };
  ordered_json doc;
  doc["data"] = {
      {"root", with_origin("data.root", dataset_root ? ordered_json(dataset_root->string())
                                                      : ordered_json(nullptr))},
      {"train_fraction", with_origin("data.train_fraction", train_fraction)},
      {"seed", with_origin("data.seed", seed)},
      {"workers", with_origin("data.workers", workers)}};
  doc["augmentation"] = {
      {"zoom_range", with_origin("augmentation.zoom_range", augmentation.zoom_range)},
      {"rotation_range", with_origin("augmentation.rotation_range", augmentation.rotation_range)},
      {"horizontal_flip",
       with_origin("augmentation.horizontal_flip", augmentation.horizontal_flip)},
      {"vertical_flip", with_origin("augmentation.vertical_flip", augmentation.vertical_flip)}};
  doc["training"] = {
      {"loss", std::string(training::kLossName)},
      {"optimizer", "adam"},
      {"learning_rate", with_origin("training.learning_rate", training.adam.learning_rate)},
      {"beta_1", with_origin("training.beta_1", training.adam.beta1)},
      {"beta_2", with_origin("training.beta_2", training.adam.beta2)},
      {"epsilon", with_origin("training.epsilon", training.adam.epsilon)},
      {"epochs", with_origin("training.epochs", training.epochs)},
      {"batch_size", with_origin("training.batch_size", training.batch_size)},
      {"micro_batch_size",
       with_origin("training.micro_batch_size", training.effective_micro_batch())},
      {"freeze_policy", with_origin("training.freeze_policy",
                                    std::string(modelzoo::freeze_policy_name(
                                        training.freeze_policy)))}};
  doc["models"] = {
      {"backbones", with_origin("models.backbones", join_backbones(backbones))},
      {"weights", with_origin("models.weights",
                              std::string(modelzoo::weight_source_name(weights)))},
      {"cache_dir", with_origin("models.cache_dir", cache_dir ? ordered_json(cache_dir->string())
                                                              : ordered_json(nullptr))}};
  doc["output"] = {{"dir", with_origin("output.dir", output_dir.string())}};
  return doc;
}

std::string CliConfig::describe() const {
  std::ostringstream os;
  const ordered_json doc = to_json();
  for (const auto& [section, entries] : doc.items()) {
    for (const auto& [name, entry] : entries.items()) {
      if (!entry.is_object()) {
        os << section << "." << name << " = " << (entry.is_string() ? entry.get<std::string>()
                                                                    : entry.dump())
           << "  (fixed)\n";
        continue;
      }
      const auto& v = entry.at("value");
      std::string text = v.is_string() ? v.get<std::string>()
                         : v.is_null() ? std::string("(unset)")
                         : v.is_number_float() ? format_double(v.get<double>())
                                               : v.dump();
      os << section << "." << name << " = " << text << "  ("
         << entry.at("origin").get<std::string>() << ")\n";
    }
  }
  return os.str();
}

}  // namespace dermabench::cli
