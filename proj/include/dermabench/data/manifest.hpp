#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dermabench/data/label.hpp"

namespace dermabench::data {

enum class Split { Train, Validation };

std::string_view split_name(Split split) noexcept;
std::optional<Split> parse_split(std::string_view name);

struct ManifestEntry {
  std::string path;  // relative to the manifest root, '/' separated
  LesionLabel label;
  std::optional<Split> split;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct ClassCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t unassigned = 0;

  std::size_t total() const noexcept { return train + validation + unassigned; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// A file skipped during scanning.
struct ScanWarning {
  std::string path;
  std::string message;
};

/// Labeled image list with optional train/validation assignment.
/// Entries are kept sorted by relative path.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  DatasetManifest(std::filesystem::path root, std::vector<ManifestEntry> entries);

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  std::optional<double> train_fraction() const noexcept { return train_fraction_; }
  const std::vector<ScanWarning>& warnings() const noexcept { return warnings_; }

  bool is_split() const noexcept;

  /// Recomputed from entries on every call.
  std::map<LesionLabel, ClassCounts> counts() const;
  std::size_t count(Split split) const;
  std::size_t count(LesionLabel label) const;

  /// Entries of one split, in manifest order.
  std::vector<ManifestEntry> entries_for(Split split) const;

  std::filesystem::path absolute_path(const ManifestEntry& entry) const {
    return root_ / entry.path;
  }

  /// Serialized form: stable key order, two-space indent, LF, trailing
  /// newline. Identical manifests produce identical bytes.
  std::string to_json_string() const;
  static DatasetManifest from_json_string(const std::string& text);

  /// Atomic write (temp file + rename).
  void save(const std::filesystem::path& path) const;
  static DatasetManifest load(const std::filesystem::path& path);

  /// FNV-1a over the serialized manifest, hex encoded.
  std::string fingerprint() const;

  /// Throws DatasetError if any entry is missing on disk or paths repeat.
  void verify_files() const;

 private:
  friend DatasetManifest split_manifest(const DatasetManifest&, double,
                                        std::uint64_t,
                                        std::vector<std::string>*);
  friend DatasetManifest scan_dataset(const std::filesystem::path&, bool);

  std::filesystem::path root_;
  std::vector<ManifestEntry> entries_;
  std::optional<std::uint64_t> seed_;
  std::optional<double> train_fraction_;
  std::vector<ScanWarning> warnings_;
};

/// Enumerates <root>/benign and <root>/malignant. Files with an image
/// extension that fail to decode are recorded in warnings() and skipped.
/// Throws DatasetError for a missing class directory and EmptyClassError
/// when a class ends up with no usable image.
DatasetManifest scan_dataset(const std::filesystem::path& root,
                             bool verify_decode = true);

/// Number of entries of a class of size `class_size` assigned to Train.
std::size_t train_quota(std::size_t class_size, double train_fraction);

/// Per-class stratified assignment: floor(fraction * n_c) entries of every
/// class go to Train. The chosen members depend only on (seed, sorted paths).
/// Classes with fewer than two entries produce a warning message.
DatasetManifest split_manifest(const DatasetManifest& manifest,
                               double train_fraction, std::uint64_t seed,
                               std::vector<std::string>* warnings = nullptr);

}  // namespace dermabench::data
