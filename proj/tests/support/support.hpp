#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dermabench/data/image.hpp"
#include "dermabench/data/label.hpp"

namespace dermabench::fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "dermabench");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

/// 8-bit PNG/JPEG of one RGB colour (components in 0..255).
void write_solid_image(const std::filesystem::path& path, std::array<int, 3> rgb,
                       int height = 8, int width = 8);

/// 8-bit image with pseudo-random pixels.
void write_noise_image(const std::filesystem::path& path, std::uint64_t seed, int height = 16,
                       int width = 16);

/// <root>/benign and <root>/malignant with the given number of small PNGs.
void make_class_tree(const std::filesystem::path& root, std::size_t benign,
                     std::size_t malignant, int size = 4);

/// Solid red for malignant, solid blue for benign, model input size.
data::ImageTensor solid_tensor(data::LesionLabel label, int size = 224);

/// `per_class` images of each class, alternating benign / malignant.
void separable_set(std::size_t per_class, std::vector<data::ImageTensor>& images,
                   std::vector<data::LesionLabel>& labels, int size = 224);

/// Random [0, 1] image.
data::ImageTensor random_tensor(std::uint64_t seed, int height, int width);

}  // namespace dermabench::fixtures
