#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dermabench/data/augment.hpp"
#include "dermabench/data/image.hpp"
#include "dermabench/data/label.hpp"
#include "dermabench/data/manifest.hpp"

namespace dermabench::data {

struct Batch {
  std::vector<ImageTensor> images;
  std::vector<LesionLabel> labels;

  std::size_t size() const noexcept { return images.size(); }
  std::vector<std::array<float, 2>> one_hot() const;
};

/// Single-consumer, in-order stream of batches, restartable per epoch.
class BatchStream {
 public:
  virtual ~BatchStream() = default;

  /// Rewinds to the first batch of `epoch`. Must be called before next().
  virtual void start_epoch(std::uint64_t epoch) = 0;
  /// Next batch of the current epoch, or nullopt once it is exhausted.
  virtual std::optional<Batch> next() = 0;

  virtual std::size_t sample_count() const = 0;
  virtual std::size_t batch_size() const = 0;

  std::size_t batches_per_epoch() const {
    return (sample_count() + batch_size() - 1) / batch_size();
  }
};

struct BatchOptions {
  std::size_t batch_size = 64;
  /// Only valid for the Train split.
  std::optional<AugmentationConfig> augmentation;
  std::uint64_t seed = 0;
  ImageSize image_size = kModelInputSize;
  /// Decoding threads; never changes the produced batches.
  unsigned workers = 1;
};

/// Streams one split of a manifest from disk. The Train split is reshuffled
/// every epoch from (seed, epoch) and augmented per sample; the Validation
/// split is always in manifest order and never augmented.
class ManifestBatchStream final : public BatchStream {
 public:
  ManifestBatchStream(const DatasetManifest& manifest, Split split,
                      BatchOptions options);

  void start_epoch(std::uint64_t epoch) override;
  std::optional<Batch> next() override;
  std::size_t sample_count() const override { return entries_.size(); }
  std::size_t batch_size() const override { return options_.batch_size; }

  Split split() const noexcept { return split_; }
  /// Manifest entries in the order the current epoch yields them.
  std::vector<ManifestEntry> epoch_order() const;

 private:
  ImageTensor load_sample(std::size_t entry_index) const;

  std::filesystem::path root_;
  std::vector<ManifestEntry> entries_;
  Split split_;
  BatchOptions options_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  bool started_ = false;
};

/// Fixed-order stream over images already in memory.
class InMemoryBatchStream final : public BatchStream {
 public:
  InMemoryBatchStream(std::vector<ImageTensor> images,
                      std::vector<LesionLabel> labels, std::size_t batch_size);

  void start_epoch(std::uint64_t epoch) override;
  std::optional<Batch> next() override;
  std::size_t sample_count() const override { return images_.size(); }
  std::size_t batch_size() const override { return batch_size_; }

 private:
  std::vector<ImageTensor> images_;
  std::vector<LesionLabel> labels_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
};

}  // namespace dermabench::data
