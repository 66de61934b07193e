#include "dermabench/data/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "dermabench/error.hpp"

namespace dermabench::data {

namespace {

// Decoded image as float RGB in [0, 1].
cv::Mat decode_rgb(const std::filesystem::path& path) {
  cv::Mat raw;
  try {
    raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw DecodeError(path.string(), std::string("cannot decode image (") +
                                         e.what() + ")");
  }
  if (raw.empty()) throw DecodeError(path.string(), "cannot decode image");

  double max_value = 255.0;
  switch (raw.depth()) {
    case CV_8U: max_value = 255.0; break;
    case CV_16U: max_value = 65535.0; break;
    case CV_32F: max_value = 1.0; break;
    default:
      throw DecodeError(path.string(), "unsupported pixel depth");
  }

  cv::Mat rgb;
  switch (raw.channels()) {
    case 1: cv::cvtColor(raw, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(raw, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(raw, rgb, cv::COLOR_BGRA2RGB); break;
    default:
      throw DecodeError(path.string(), "unsupported channel count");
  }
  cv::Mat scaled;
  rgb.convertTo(scaled, CV_32FC3, 1.0 / max_value);
  return scaled;
}

ImageTensor from_mat(const cv::Mat& mat, std::string source) {
  CV_Assert(mat.type() == CV_32FC3);
  ImageTensor image(mat.rows, mat.cols, std::move(source));
  auto out = image.pixels();
  for (int y = 0; y < mat.rows; ++y) {
    const float* row = mat.ptr<float>(y);
    std::copy(row, row + static_cast<std::size_t>(mat.cols) * 3,
              out.begin() + static_cast<std::ptrdiff_t>(y) * mat.cols * 3);
  }
  for (auto& v : out) v = std::clamp(v, 0.0F, 1.0F);
  return image;
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, std::string source_path)
    : height_(height),
      width_(width),
      pixels_(static_cast<std::size_t>(height) * width * kChannels, 0.0F),
      source_path_(std::move(source_path)) {}

ImageTensor::ImageTensor(int height, int width, std::vector<float> pixels,
                         std::string source_path)
    : height_(height),
      width_(width),
      pixels_(std::move(pixels)),
      source_path_(std::move(source_path)) {
  if (pixels_.size() != static_cast<std::size_t>(height) * width * kChannels)
    throw std::invalid_argument("ImageTensor: pixel count does not match shape");
}

bool has_image_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

bool is_decodable_image(const std::filesystem::path& path) {
  const auto decodes = [&](int flags) {
    try {
      return !cv::imread(path.string(), flags).empty();
    } catch (const cv::Exception&) {
      return false;
    }
  };
  try {
    if (!cv::haveImageReader(path.string())) return false;
  } catch (const cv::Exception&) {
    return false;
  }
  // Reduced decoding keeps large JPEG scans fast; it still runs the full
  // entropy decoder so truncated files are caught. Images under 8 px fail
  // at 1/8 scale and get a full decode.
  return decodes(cv::IMREAD_REDUCED_GRAYSCALE_8) || decodes(cv::IMREAD_GRAYSCALE);
}

ImageTensor load_image_native(const std::filesystem::path& path) {
  return from_mat(decode_rgb(path), path.string());
}

ImageTensor load_image(const std::filesystem::path& path, ImageSize target) {
  if (target.height <= 0 || target.width <= 0)
    throw ConfigError("load_image: target size must be positive");
  cv::Mat rgb = decode_rgb(path);
  if (rgb.rows != target.height || rgb.cols != target.width) {
    cv::Mat resized;
    cv::resize(rgb, resized, cv::Size(target.width, target.height), 0, 0,
               cv::INTER_LINEAR);
    rgb = resized;
  }
  return from_mat(rgb, path.string());
}

void save_image(const ImageTensor& image, const std::filesystem::path& path) {
  cv::Mat rgb(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = rgb.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c)
        row[x * 3 + c] = static_cast<std::uint8_t>(
            std::lround(std::clamp(image.at(y, x, c), 0.0F, 1.0F) * 255.0F));
  }
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw FilesystemError("cannot write image " + path.string() + ": " +
                          e.what());
  }
  if (!ok) throw FilesystemError("cannot write image " + path.string());
}

}  // namespace dermabench::data
