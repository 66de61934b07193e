#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dermabench::data {

struct ImageSize {
  int height = 224;
  int width = 224;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline constexpr ImageSize kModelInputSize{224, 224};

/// Interleaved RGB image, row-major HWC, values in [0, 1].
class ImageTensor {
 public:
  static constexpr int kChannels = 3;

  ImageTensor() = default;
  ImageTensor(int height, int width, std::string source_path = {});
  ImageTensor(int height, int width, std::vector<float> pixels,
              std::string source_path = {});

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  ImageSize size() const noexcept { return {height_, width_}; }
  const std::string& source_path() const noexcept { return source_path_; }
  void set_source_path(std::string path) { source_path_ = std::move(path); }

  float& at(int y, int x, int c) noexcept {
    return pixels_[index(y, x, c)];
  }
  float at(int y, int x, int c) const noexcept {
    return pixels_[index(y, x, c)];
  }

  std::span<float> pixels() noexcept { return pixels_; }
  std::span<const float> pixels() const noexcept { return pixels_; }

  /// Exact elementwise equality of shape and pixel values.
  bool same_pixels(const ImageTensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           pixels_ == other.pixels_;
  }

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> pixels_;
  std::string source_path_;
};

/// True for .jpg/.jpeg/.png, case-insensitive.
bool has_image_extension(const std::filesystem::path& path);

/// Cheap decodability probe used while scanning large directories.
bool is_decodable_image(const std::filesystem::path& path);

/// Decodes, converts to 3-channel RGB (grayscale is replicated), resizes
/// with bilinear interpolation to `target` and scales to [0, 1] by the
/// source bit depth. Throws DecodeError.
ImageTensor load_image(const std::filesystem::path& path,
                       ImageSize target = kModelInputSize);

/// Decodes without resizing.
ImageTensor load_image_native(const std::filesystem::path& path);

/// Writes an 8-bit PNG/JPEG (by extension). Values are rounded to the
/// nearest 1/255 step.
void save_image(const ImageTensor& image, const std::filesystem::path& path);

}  // namespace dermabench::data
