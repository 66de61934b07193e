#include "dermabench/data/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "dermabench/data/image.hpp"
#include "dermabench/error.hpp"
#include "dermabench/util/files.hpp"

namespace dermabench::data {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view split_name(Split split) noexcept {
  return split == Split::Train ? "train" : "validation";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  return std::nullopt;
}

DatasetManifest::DatasetManifest(fs::path root, std::vector<ManifestEntry> entries)
    : root_(std::move(root)), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].path == entries_[i - 1].path)
      throw DatasetError("duplicate manifest path: " + entries_[i].path);
}

bool DatasetManifest::is_split() const noexcept {
  return !entries_.empty() &&
         std::all_of(entries_.begin(), entries_.end(),
                     [](const ManifestEntry& e) { return e.split.has_value(); });
}

std::map<LesionLabel, ClassCounts> DatasetManifest::counts() const {
  std::map<LesionLabel, ClassCounts> out;
  for (LesionLabel label : kAllLabels) out[label] = {};
  for (const auto& e : entries_) {
    auto& c = out[e.label];
    if (!e.split) ++c.unassigned;
    else if (*e.split == Split::Train) ++c.train;
    else ++c.validation;
  }
  return out;
}

std::size_t DatasetManifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(),
      [split](const ManifestEntry& e) { return e.split == split; }));
}

std::size_t DatasetManifest::count(LesionLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(),
      [label](const ManifestEntry& e) { return e.label == label; }));
}

std::vector<ManifestEntry> DatasetManifest::entries_for(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries_)
    if (e.split == split) out.push_back(e);
  return out;
}

std::string DatasetManifest::to_json_string() const {
  ordered_json doc;
  doc["root"] = root_.generic_string();
  doc["seed"] = seed_ ? ordered_json(*seed_) : ordered_json(nullptr);
  doc["train_fraction"] =
      train_fraction_ ? ordered_json(*train_fraction_) : ordered_json(nullptr);
  auto entries = ordered_json::array();
  for (const auto& e : entries_) {
    ordered_json item;
    item["path"] = e.path;
    item["label"] = std::string(label_name(e.label));
    item["split"] = e.split ? ordered_json(std::string(split_name(*e.split)))
                            : ordered_json(nullptr);
    entries.push_back(std::move(item));
  }
  doc["entries"] = std::move(entries);
  ordered_json counts_json;
  for (const auto& [label, c] : counts()) {
    ordered_json item;
    item["train"] = c.train;
    item["validation"] = c.validation;
    item["total"] = c.total();
    counts_json[std::string(label_name(label))] = std::move(item);
  }
  doc["counts"] = std::move(counts_json);
  return doc.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json_string(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("malformed manifest JSON: ") + e.what());
  }
  try {
    std::vector<ManifestEntry> entries;
    for (const auto& item : doc.at("entries")) {
      auto label = parse_label(item.at("label").get<std::string>());
      if (!label) throw DatasetError("manifest entry has unknown label");
      std::optional<Split> split;
      if (!item.at("split").is_null()) {
        split = parse_split(item.at("split").get<std::string>());
        if (!split) throw DatasetError("manifest entry has unknown split");
      }
      entries.push_back({item.at("path").get<std::string>(), *label, split});
    }
    DatasetManifest m(fs::path(doc.at("root").get<std::string>()), std::move(entries));
    if (!doc.at("seed").is_null()) m.seed_ = doc.at("seed").get<std::uint64_t>();
    if (!doc.at("train_fraction").is_null())
      m.train_fraction_ = doc.at("train_fraction").get<double>();

    const auto recomputed = m.counts();
    for (const auto& [label, c] : recomputed) {
      const auto& stored = doc.at("counts").at(std::string(label_name(label)));
      if (stored.at("train").get<std::size_t>() != c.train ||
          stored.at("validation").get<std::size_t>() != c.validation ||
          stored.at("total").get<std::size_t>() != c.total())
        throw DatasetError("manifest counts do not match its entries for class " +
                           std::string(label_name(label)));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("invalid manifest: ") + e.what());
  }
}

void DatasetManifest::save(const fs::path& path) const {
  util::write_file_atomic(path, to_json_string());
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  return from_json_string(util::read_file(path));
}

std::string DatasetManifest::fingerprint() const {
  return util::to_hex(util::fnv1a64(to_json_string()));
}

void DatasetManifest::verify_files() const {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.path).second)
      throw DatasetError("duplicate manifest path: " + e.path);
    const fs::path p = absolute_path(e);
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
      throw DatasetError("manifest entry does not exist: " + p.string());
  }
}

DatasetManifest scan_dataset(const fs::path& root, bool verify_decode) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw DatasetError("dataset root is not a directory: " + root.string());

  std::vector<ManifestEntry> entries;
  std::vector<ScanWarning> warnings;
  for (LesionLabel label : kAllLabels) {
    const fs::path class_dir = root / std::string(label_name(label));
    if (!fs::is_directory(class_dir, ec))
      throw DatasetError("missing class directory '" +
                         std::string(label_name(label)) + "' under " +
                         root.string());
    std::size_t usable = 0;
    for (const auto& item : fs::directory_iterator(class_dir)) {
      if (!item.is_regular_file()) continue;
      const fs::path& p = item.path();
      if (p.filename().string().starts_with(".") || !has_image_extension(p))
        continue;
      const std::string rel = fs::relative(p, root).generic_string();
      if (verify_decode && !is_decodable_image(p)) {
        warnings.push_back({rel, "undecodable image skipped"});
        continue;
      }
      entries.push_back({rel, label, std::nullopt});
      ++usable;
    }
    if (usable == 0)
      throw EmptyClassError("class '" + std::string(label_name(label)) +
                            "' has no decodable images under " +
                            class_dir.string());
  }
  DatasetManifest manifest(fs::absolute(root).lexically_normal(), std::move(entries));
  std::sort(warnings.begin(), warnings.end(),
            [](const ScanWarning& a, const ScanWarning& b) { return a.path < b.path; });
  manifest.warnings_ = std::move(warnings);
  return manifest;
}

std::size_t train_quota(std::size_t class_size, double train_fraction) {
  // The epsilon absorbs representation error, e.g. 0.7 * 10 must give 7.
  return static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(class_size) + 1e-9));
}

DatasetManifest split_manifest(const DatasetManifest& manifest,
                               double train_fraction, std::uint64_t seed,
                               std::vector<std::string>* warnings) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1), got " +
                      std::to_string(train_fraction));
  for (const auto& e : manifest.entries())
    if (e.split)
      throw ConfigError("split_manifest expects an unsplit manifest");

  DatasetManifest out = manifest;
  for (LesionLabel label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.entries_.size(); ++i)
      if (out.entries_[i].label == label) members.push_back(i);
    if (members.size() < 2 && warnings)
      warnings->push_back("class '" + std::string(label_name(label)) +
                          "' has fewer than 2 entries; cannot hold out validation");

    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(class_index(label))};
    std::mt19937_64 rng(seq);
    std::shuffle(members.begin(), members.end(), rng);

    const std::size_t quota = train_quota(members.size(), train_fraction);
    for (std::size_t k = 0; k < members.size(); ++k)
      out.entries_[members[k]].split = k < quota ? Split::Train : Split::Validation;
  }
  out.seed_ = seed;
  out.train_fraction_ = train_fraction;
  return out;
}

}  // namespace dermabench::data
