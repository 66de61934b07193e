#include "support.hpp"

#include <random>

#include <opencv2/imgcodecs.hpp>

namespace dermabench::fixtures {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rng() % 100000000));
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
  fs::remove_all(path_, ec);
}

void write_solid_image(const fs::path& path, std::array<int, 3> rgb, int height, int width) {
  fs::create_directories(path.parent_path());
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(rgb[2], rgb[1], rgb[0]));
  cv::imwrite(path.string(), img);
}

void write_noise_image(const fs::path& path, std::uint64_t seed, int height, int width) {
  fs::create_directories(path.parent_path());
  std::mt19937_64 rng(seed);
  cv::Mat img(height, width, CV_8UC3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) img.at<cv::Vec3b>(y, x)[c] = static_cast<uchar>(rng() % 256);
  cv::imwrite(path.string(), img);
}

void make_class_tree(const fs::path& root, std::size_t benign, std::size_t malignant, int size) {
  for (auto [name, count, rgb] : {std::tuple{"benign", benign, std::array<int, 3>{0, 0, 255}},
                                  std::tuple{"malignant", malignant, std::array<int, 3>{255, 0, 0}}}) {
    fs::create_directories(root / name);
    for (std::size_t i = 0; i < count; ++i) {
      char file[32];
      std::snprintf(file, sizeof file, "img%05zu.png", i);
      write_solid_image(root / name / file, rgb, size, size);
    }
  }
}

data::ImageTensor solid_tensor(data::LesionLabel label, int size) {
  data::ImageTensor img(size, size);
  const bool malignant = label == data::LesionLabel::Malignant;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      img.at(y, x, 0) = malignant ? 1.0f : 0.0f;
      img.at(y, x, 1) = 0.0f;
      img.at(y, x, 2) = malignant ? 0.0f : 1.0f;
    }
  return img;
}

void separable_set(std::size_t per_class, std::vector<data::ImageTensor>& images,
                   std::vector<data::LesionLabel>& labels, int size) {
  for (std::size_t i = 0; i < per_class; ++i)
    for (auto label : data::kAllLabels) {
      images.push_back(solid_tensor(label, size));
      labels.push_back(label);
    }
}

data::ImageTensor random_tensor(std::uint64_t seed, int height, int width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  data::ImageTensor img(height, width);
  for (auto& v : img.pixels()) v = u(rng);
  return img;
}

}  // namespace dermabench::fixtures
