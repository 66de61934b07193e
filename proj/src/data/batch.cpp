#include "dermabench/data/batch.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "dermabench/error.hpp"

namespace dermabench::data {

std::vector<std::array<float, 2>> Batch::one_hot() const {
  std::vector<std::array<float, 2>> out;
  out.reserve(labels.size());
  for (LesionLabel label : labels) out.push_back(encode_label(label).one_hot);
  return out;
}

ManifestBatchStream::ManifestBatchStream(const DatasetManifest& manifest,
                                         Split split, BatchOptions options)
    : root_(manifest.root()),
      entries_(manifest.entries_for(split)),
      split_(split),
      options_(std::move(options)) {
  if (options_.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!manifest.is_split())
    throw ConfigError("batch iteration requires a split manifest");
  if (split_ == Split::Validation && options_.augmentation)
    throw ConfigError("the validation split is never augmented");
  if (options_.augmentation) options_.augmentation->validate();
  if (options_.workers == 0) options_.workers = 1;
  order_.resize(entries_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

void ManifestBatchStream::start_epoch(std::uint64_t epoch) {
  epoch_ = epoch;
  cursor_ = 0;
  started_ = true;
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (split_ == Split::Train) {
    std::seed_seq seq{static_cast<std::uint32_t>(options_.seed),
                      static_cast<std::uint32_t>(options_.seed >> 32),
                      static_cast<std::uint32_t>(epoch),
                      static_cast<std::uint32_t>(epoch >> 32), 0x5f3759dfU};
    std::mt19937_64 rng(seq);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

std::vector<ManifestEntry> ManifestBatchStream::epoch_order() const {
  std::vector<ManifestEntry> out;
  out.reserve(order_.size());
  for (std::size_t i : order_) out.push_back(entries_[i]);
  return out;
}

ImageTensor ManifestBatchStream::load_sample(std::size_t entry_index) const {
  const ManifestEntry& entry = entries_[entry_index];
  ImageTensor image = load_image(root_ / entry.path, options_.image_size);
  if (options_.augmentation && !options_.augmentation->is_identity()) {
    auto rng = sample_rng(options_.seed, epoch_, entry_index);
    image = augment(image, *options_.augmentation, rng);
  }
  return image;
}

std::optional<Batch> ManifestBatchStream::next() {
  if (!started_) start_epoch(0);
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t count = std::min(options_.batch_size, order_.size() - cursor_);

  Batch batch;
  batch.images.resize(count);
  batch.labels.resize(count);
  for (std::size_t k = 0; k < count; ++k)
    batch.labels[k] = entries_[order_[cursor_ + k]].label;

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(options_.workers, count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k)
      batch.images[k] = load_sample(order_[cursor_ + k]);
  } else {
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t k = w; k < count; k += workers)
              batch.images[k] = load_sample(order_[cursor_ + k]);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }
  cursor_ += count;
  return batch;
}

InMemoryBatchStream::InMemoryBatchStream(std::vector<ImageTensor> images,
                                         std::vector<LesionLabel> labels,
                                         std::size_t batch_size)
    : images_(std::move(images)), labels_(std::move(labels)), batch_size_(batch_size) {
  if (batch_size_ < 1) throw ConfigError("batch_size must be >= 1");
  if (images_.size() != labels_.size())
    throw ConfigError("image and label counts differ");
}

void InMemoryBatchStream::start_epoch(std::uint64_t) { cursor_ = 0; }

std::optional<Batch> InMemoryBatchStream::next() {
  if (cursor_ >= images_.size()) return std::nullopt;
  const std::size_t end = std::min(images_.size(), cursor_ + batch_size_);
  Batch batch;
  batch.images.assign(images_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                      images_.begin() + static_cast<std::ptrdiff_t>(end));
  batch.labels.assign(labels_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                      labels_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return batch;
}

}  // namespace dermabench::data
