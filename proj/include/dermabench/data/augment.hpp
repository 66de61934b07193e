#pragma once

#include <cstdint>
#include <random>

#include "dermabench/data/image.hpp"

namespace dermabench::data {

/// Stochastic geometric augmentation. Defaults are the identity; table1()
/// gives the training configuration (zoom 2, rotation 90, both flips).
struct AugmentationConfig {
  /// 0 disables zoom. Otherwise the scale factor is uniform in
  /// [1/zoom_range, zoom_range], so values in (0, 1) are rejected.
  double zoom_range = 0.0;
  /// Degrees; the angle is uniform in [-rotation_range, +rotation_range].
  double rotation_range = 0.0;
  bool horizontal_flip = false;
  bool vertical_flip = false;

  static constexpr AugmentationConfig table1() noexcept {
    return {2.0, 90.0, true, true};
  }

  /// Throws ConfigError.
  void validate() const;
  bool is_identity() const noexcept {
    return (zoom_range == 0.0 || zoom_range == 1.0) && rotation_range == 0.0 &&
           !horizontal_flip && !vertical_flip;
  }

  friend bool operator==(const AugmentationConfig&,
                         const AugmentationConfig&) = default;
};

/// One concrete draw of the random transform parameters.
struct AugmentationDraw {
  double scale = 1.0;
  double angle_degrees = 0.0;
  bool flip_horizontal = false;
  bool flip_vertical = false;
};

/// Per-sample generator derived from (seed, epoch, sample index), so the
/// result does not depend on which worker loads the sample.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t epoch,
                           std::uint64_t sample_index);

AugmentationDraw draw_augmentation(const AugmentationConfig& config,
                                   std::mt19937_64& rng);

/// Applies zoom, then rotation (one bilinear warp about the image centre,
/// edge pixels replicated), then the flips.
ImageTensor apply_augmentation(const ImageTensor& image,
                               const AugmentationDraw& draw);

ImageTensor augment(const ImageTensor& image, const AugmentationConfig& config,
                    std::mt19937_64& rng);

ImageTensor flip_horizontal(const ImageTensor& image);
ImageTensor flip_vertical(const ImageTensor& image);

}  // namespace dermabench::data
