#include "dermabench/data/augment.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "dermabench/error.hpp"

namespace dermabench::data {

void AugmentationConfig::validate() const {
  if (!std::isfinite(zoom_range) || zoom_range < 0.0)
    throw ConfigError("zoom_range must be >= 0");
  if (zoom_range > 0.0 && zoom_range < 1.0)
    throw ConfigError(
        "zoom_range must be 0 (off) or >= 1; scale is drawn from "
        "[1/zoom_range, zoom_range]");
  if (!std::isfinite(rotation_range) || rotation_range < 0.0 ||
      rotation_range > 360.0)
    throw ConfigError("rotation_range must lie in [0, 360] degrees");
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t epoch,
                           std::uint64_t sample_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(epoch >> 32),
                    static_cast<std::uint32_t>(sample_index),
                    static_cast<std::uint32_t>(sample_index >> 32)};
  return std::mt19937_64(seq);
}

AugmentationDraw draw_augmentation(const AugmentationConfig& config,
                                   std::mt19937_64& rng) {
  config.validate();
  AugmentationDraw draw;
  if (config.zoom_range > 1.0) {
    std::uniform_real_distribution<double> zoom(1.0 / config.zoom_range,
                                                config.zoom_range);
    draw.scale = zoom(rng);
  }
  if (config.rotation_range > 0.0) {
    std::uniform_real_distribution<double> angle(-config.rotation_range,
                                                 config.rotation_range);
    draw.angle_degrees = angle(rng);
  }
  std::bernoulli_distribution coin(0.5);
  if (config.horizontal_flip) draw.flip_horizontal = coin(rng);
  if (config.vertical_flip) draw.flip_vertical = coin(rng);
  return draw;
}

ImageTensor flip_horizontal(const ImageTensor& image) {
  ImageTensor out(image.height(), image.width(), image.source_path());
  const int w = image.width();
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ImageTensor::kChannels; ++c)
        out.at(y, x, c) = image.at(y, w - 1 - x, c);
  return out;
}

ImageTensor flip_vertical(const ImageTensor& image) {
  ImageTensor out(image.height(), image.width(), image.source_path());
  const int h = image.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < ImageTensor::kChannels; ++c)
        out.at(y, x, c) = image.at(h - 1 - y, x, c);
  return out;
}

namespace {

ImageTensor warp_similarity(const ImageTensor& image, double scale,
                            double angle_degrees) {
  // cv::Mat header over the tensor storage; the source is never written.
  const cv::Mat src(image.height(), image.width(), CV_32FC3,
                    const_cast<float*>(image.pixels().data()));
  const cv::Point2f centre(static_cast<float>(image.width() - 1) / 2.0F,
                           static_cast<float>(image.height() - 1) / 2.0F);
  // Scale and rotation about a common centre commute, so one warp applies
  // the zoom followed by the rotation.
  const cv::Mat transform = cv::getRotationMatrix2D(centre, angle_degrees, scale);
  ImageTensor out(image.height(), image.width(), image.source_path());
  cv::Mat dst(out.height(), out.width(), CV_32FC3, out.pixels().data());
  cv::warpAffine(src, dst, transform, src.size(), cv::INTER_LINEAR,
                 cv::BORDER_REPLICATE);
  for (auto& v : out.pixels()) v = std::clamp(v, 0.0F, 1.0F);
  return out;
}

}  // namespace

ImageTensor apply_augmentation(const ImageTensor& image,
                               const AugmentationDraw& draw) {
  ImageTensor out = image;
  if (draw.scale != 1.0 || draw.angle_degrees != 0.0)
    out = warp_similarity(out, draw.scale, draw.angle_degrees);
  if (draw.flip_horizontal) out = flip_horizontal(out);
  if (draw.flip_vertical) out = flip_vertical(out);
  return out;
}

ImageTensor augment(const ImageTensor& image, const AugmentationConfig& config,
                    std::mt19937_64& rng) {
  return apply_augmentation(image, draw_augmentation(config, rng));
}

}  // namespace dermabench::data
