// Compares the native backbones with torchvision on fixtures written by
// tools/convert_torchvision_weights.py --reference.

#include <cstdlib>
#include <cstring>
#include <fstream>

#include <gtest/gtest.h>

#include "dermabench/modelzoo/checkpoint.hpp"
#include "dermabench/modelzoo/classifier.hpp"

namespace fs = std::filesystem;
using namespace dermabench;
using namespace dermabench::modelzoo;

namespace {

fs::path fixture_dir() {
  const char* dir = std::getenv("DERMABENCH_PARITY_DIR");
  return dir ? fs::path(dir) : fs::path();
}

template <typename T>
std::vector<T> read_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes{std::istreambuf_iterator<char>(in), {}};
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
  return out;
}

class Parity : public ::testing::TestWithParam<BackboneId> {
 protected:
  void SetUp() override {
    key_ = std::string(backbone_key(GetParam()));
    if (fixture_dir().empty() || !fs::exists(fixture_dir() / (key_ + ".dbck")))
      GTEST_SKIP() << "no parity fixtures for " << key_;
  }
  std::string key_;
};

}  // namespace

TEST_P(Parity, ProbabilitiesMatchTorchvision) {
  const fs::path dir = fixture_dir();
  ClassifierModel model = load_checkpoint(dir / (key_ + ".dbck"));
  const auto pixels = read_raw<float>(dir / (key_ + "-input.f32"));
  const auto expected = read_raw<double>(dir / (key_ + "-expected.f64"));
  const std::size_t per_image = 224 * 224 * 3;
  ASSERT_EQ(pixels.size(), 2 * per_image);
  ASSERT_EQ(expected.size(), 4u);

  std::vector<data::ImageTensor> images;
  for (std::size_t i = 0; i < 2; ++i)
    images.emplace_back(224, 224, std::vector<float>(pixels.begin() + i * per_image,
                                                     pixels.begin() + (i + 1) * per_image));
  const torch::Tensor p = model->predict(images).to(torch::kFloat64);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      EXPECT_NEAR(p[i][k].item<double>(), expected[i * 2 + k], 1e-5) << "image " << i;
}

TEST_P(Parity, CachedWeightsLoadThroughBuildModel) {
  const fs::path cache = fixture_dir() / "cache";
  ModelOptions o;
  o.cache_dir = cache;
  ClassifierModel built = build_model(GetParam(), o);
  ClassifierModel reference = load_checkpoint(fixture_dir() / (key_ + ".dbck"));
  const auto a = named_state(built->backbone());
  const auto b = named_state(reference->backbone());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].first, b[i].first);
    EXPECT_TRUE(torch::equal(a[i].second, b[i].second)) << a[i].first;
  }
}

INSTANTIATE_TEST_SUITE_P(Torchvision, Parity,
                         ::testing::ValuesIn(kAllBackbones.begin(), kAllBackbones.end()),
                         [](const auto& info) { return std::string(backbone_key(info.param)); });
