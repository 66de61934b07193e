#include "dermabench/modelzoo/preprocess.hpp"

#include <algorithm>

#include "dermabench/error.hpp"

namespace dermabench::modelzoo {

nlohmann::ordered_json PreprocessDescriptor::to_json() const {
  return {{"scheme", scheme},
          {"input_range", "[0, 1] RGB"},
          {"mean", mean},
          {"std", stddev}};
}

PreprocessDescriptor PreprocessDescriptor::from_json(const nlohmann::ordered_json& doc) {
  return {doc.at("scheme").get<std::string>(),
          doc.at("mean").get<std::array<double, 3>>(),
          doc.at("std").get<std::array<double, 3>>()};
}

PreprocessDescriptor preprocessing_for(BackboneId id) {
  if (id == BackboneId::InceptionV3)
    return {"inception_symmetric", {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
  return {"imagenet_mean_std", {0.485, 0.456, 0.406}, {0.229, 0.224, 0.225}};
}

torch::Tensor images_to_tensor(std::span<const data::ImageTensor> images) {
  if (images.empty()) throw ConfigError("cannot build a tensor from zero images");
  const int h = images.front().height();
  const int w = images.front().width();
  torch::Tensor out = torch::empty({static_cast<int64_t>(images.size()), h, w, 3});
  float* dst = out.data_ptr<float>();
  const std::size_t per_image = static_cast<std::size_t>(h) * w * 3;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].height() != h || images[i].width() != w)
      throw ConfigError("all images in a batch must share one size");
    std::copy(images[i].pixels().begin(), images[i].pixels().end(), dst + i * per_image);
  }
  return out;
}

torch::Tensor apply_preprocessing(const torch::Tensor& nhwc,
                                  const PreprocessDescriptor& descriptor) {
  const auto opts = torch::TensorOptions().dtype(nhwc.dtype());
  const torch::Tensor mean =
      torch::tensor({descriptor.mean[0], descriptor.mean[1], descriptor.mean[2]}, opts);
  const torch::Tensor stddev =
      torch::tensor({descriptor.stddev[0], descriptor.stddev[1], descriptor.stddev[2]}, opts);
  return (nhwc - mean) / stddev;
}

torch::Tensor preprocess_for_backbone(const data::ImageTensor& image, BackboneId id) {
  return apply_preprocessing(images_to_tensor(std::span(&image, 1)), preprocessing_for(id))
      .squeeze(0);
}

}  // namespace dermabench::modelzoo
