#include <fstream>

#include <gtest/gtest.h>

#include "dermabench/error.hpp"
#include "dermabench/modelzoo/checkpoint.hpp"
#include "dermabench/modelzoo/classifier.hpp"
#include "dermabench/util/files.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace dermabench;
using namespace dermabench::modelzoo;
using fixtures::TempDir;

namespace {

ClassifierModel random_model(BackboneId id, std::uint64_t seed = 3,
                             FreezePolicy policy = FreezePolicy::FullFineTune) {
  ModelOptions o;
  o.weights = WeightSource::Random;
  o.head_seed = seed;
  o.freeze_policy = policy;
  return build_model(id, o);
}

std::vector<data::ImageTensor> two_images(int size = 224) {
  return {fixtures::random_tensor(1, size, size), fixtures::random_tensor(2, size, size)};
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::string bytes = util::read_file(p);
  bytes[offset] = static_cast<char>(bytes[offset] ^ 0x5a);
  std::ofstream(p, std::ios::binary | std::ios::trunc) << bytes;
}

}  // namespace

class EveryBackbone : public ::testing::TestWithParam<BackboneId> {};

TEST_P(EveryBackbone, EmitsTwoClassDistributions) {
  ClassifierModel model = random_model(GetParam());
  const auto images = two_images();
  const torch::Tensor p = model->predict(images);
  ASSERT_EQ(p.sizes(), (std::vector<int64_t>{2, 2}));
  EXPECT_TRUE(torch::isfinite(p).all().item<bool>());
  EXPECT_TRUE(torch::allclose(p.sum(1), torch::ones({2}), 0, 1e-5));
  EXPECT_TRUE(model->is_training());  // predict restores the previous mode
}

TEST_P(EveryBackbone, ParameterNamesAndHeadShape) {
  ClassifierModel model = random_model(GetParam());
  const auto state = named_state(*model);
  ASSERT_FALSE(state.empty());
  for (const auto& [name, t] : state)
    EXPECT_TRUE(name.starts_with("backbone.") || name.starts_with("head.")) << name;
  const int64_t c = model->backbone().feature_channels();
  EXPECT_EQ(model->head()->weight.sizes(), (std::vector<int64_t>{2, c}));
  EXPECT_EQ(model->trainable_parameter_count(), model->parameter_count());
}

INSTANTIATE_TEST_SUITE_P(Modelzoo, EveryBackbone,
                         ::testing::ValuesIn(kAllBackbones.begin(), kAllBackbones.end()),
                         [](const auto& info) { return std::string(backbone_key(info.param)); });

TEST(Modelzoo, FeatureWidthsMatchTheArchitectures) {
  EXPECT_EQ(make_backbone(BackboneId::ResNet101)->feature_channels(), 2048);
  EXPECT_EQ(make_backbone(BackboneId::DenseNet169)->feature_channels(), 1664);
  EXPECT_EQ(make_backbone(BackboneId::EfficientNet)->feature_channels(), 1280);
  EXPECT_EQ(make_backbone(BackboneId::InceptionV3)->feature_channels(), 2048);
}

TEST(Modelzoo, FrozenBackboneTrainsOnlyTheHead) {
  ClassifierModel model = random_model(BackboneId::EfficientNet, 3, FreezePolicy::FrozenBackbone);
  EXPECT_EQ(model->trainable_parameter_count(), 1280 * 2 + 2);
  model->train(true);
  EXPECT_TRUE(model->is_training());
  EXPECT_FALSE(model->backbone().is_training());
}

TEST(Modelzoo, SeededInitialisationIsReproducible) {
  ClassifierModel a = random_model(BackboneId::EfficientNet, 11);
  ClassifierModel b = random_model(BackboneId::EfficientNet, 11);
  ClassifierModel c = random_model(BackboneId::EfficientNet, 12);
  const auto sa = named_state(*a), sb = named_state(*b), sc = named_state(*c);
  bool any_difference = false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    EXPECT_TRUE(torch::equal(sa[i].second, sb[i].second)) << sa[i].first;
    if (sa[i].second.is_floating_point() && !torch::equal(sa[i].second, sc[i].second))
      any_difference = true;
  }
  EXPECT_TRUE(any_difference);
  EXPECT_TRUE(torch::equal(a->head()->bias, torch::zeros({2})));
}

TEST(Modelzoo, HeadFollowsGlorotUniformBounds) {
  ClassifierModel model = random_model(BackboneId::DenseNet169);
  const double limit = std::sqrt(6.0 / (1664 + 2));
  const torch::Tensor w = model->head()->weight;
  EXPECT_LE(w.abs().max().item<double>(), limit);
  EXPECT_GT(w.abs().max().item<double>(), 0.9 * limit);
}

TEST(Modelzoo, MissingPretrainedWeightsNameTheBackboneAndFile) {
  TempDir dir;
  ModelOptions o;
  o.cache_dir = dir.path();
  try {
    build_model(BackboneId::DenseNet169, o);
    FAIL();
  } catch (const AcquisitionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("densenet169"), std::string::npos);
    EXPECT_NE(msg.find(pretrained_weight_path(BackboneId::DenseNet169, dir.path()).string()),
              std::string::npos);
  }
}

TEST(Modelzoo, CacheDirectoryResolution) {
  EXPECT_EQ(weight_cache_dir(fs::path("/x/y")), fs::path("/x/y"));
  EXPECT_EQ(pretrained_weight_path(BackboneId::ResNet101, "/c"), fs::path("/c/resnet101.dbw"));
}

TEST(Preprocess, DescriptorsFollowEachBackbone) {
  const auto imagenet = preprocessing_for(BackboneId::ResNet101);
  EXPECT_DOUBLE_EQ(imagenet.mean[0], 0.485);
  EXPECT_DOUBLE_EQ(imagenet.stddev[2], 0.225);
  EXPECT_EQ(preprocessing_for(BackboneId::EfficientNet), imagenet);
  EXPECT_EQ(preprocessing_for(BackboneId::DenseNet169), imagenet);
  const auto symmetric = preprocessing_for(BackboneId::InceptionV3);
  EXPECT_EQ(symmetric.mean, (std::array{0.5, 0.5, 0.5}));
  EXPECT_EQ(PreprocessDescriptor::from_json(symmetric.to_json()), symmetric);

  data::ImageTensor img(1, 2, std::vector<float>{0.0f, 0.5f, 1.0f, 1.0f, 1.0f, 1.0f});
  const torch::Tensor t = preprocess_for_backbone(img, BackboneId::InceptionV3);
  EXPECT_FLOAT_EQ(t[0][0][0].item<float>(), -1.0f);
  EXPECT_FLOAT_EQ(t[0][0][1].item<float>(), 0.0f);
  EXPECT_FLOAT_EQ(t[0][1][2].item<float>(), 1.0f);
  const torch::Tensor r = preprocess_for_backbone(img, BackboneId::ResNet101);
  EXPECT_NEAR(r[0][0][1].item<float>(), (0.5 - 0.456) / 0.224, 1e-6);
}

TEST(Checkpoint, RoundTripKeepsPredictions) {
  TempDir dir;
  ClassifierModel model = random_model(BackboneId::EfficientNet, 21);
  const auto images = two_images();
  const torch::Tensor before = model->predict(images);
  save_checkpoint(*model, dir / "m.dbck", "fp");
  ClassifierModel loaded = load_checkpoint(dir / "m.dbck");
  const torch::Tensor after = loaded->predict(images);
  EXPECT_LE((before - after).abs().max().item<double>(), 1e-6);
  EXPECT_EQ(loaded->backbone_id(), BackboneId::EfficientNet);
  EXPECT_EQ(loaded->head_seed(), 21u);

  const CheckpointMetadata meta = read_checkpoint_metadata(dir / "m.dbck");
  EXPECT_EQ(meta.format_version, 1);
  EXPECT_EQ(meta.weight_source, WeightSource::Random);
  EXPECT_EQ(meta.train_config_fingerprint, "fp");
  EXPECT_EQ(meta.preprocessing, preprocessing_for(BackboneId::EfficientNet));
}

TEST(Checkpoint, CorruptionIsDetected) {
  TempDir dir;
  ClassifierModel model = random_model(BackboneId::EfficientNet);
  save_checkpoint(*model, dir / "m.dbck");
  const std::string good = util::read_file(dir / "m.dbck");

  fs::copy_file(dir / "m.dbck", dir / "v.dbck");
  flip_byte(dir / "v.dbck", container::kVersionOffset);
  EXPECT_THROW(load_checkpoint(dir / "v.dbck"), IncompatibleCheckpointError);

  fs::copy_file(dir / "m.dbck", dir / "p.dbck");
  flip_byte(dir / "p.dbck", good.size() / 2);
  EXPECT_THROW(load_checkpoint(dir / "p.dbck"), CheckpointIntegrityError);

  fs::copy_file(dir / "m.dbck", dir / "g.dbck");
  flip_byte(dir / "g.dbck", 0);
  EXPECT_THROW(load_checkpoint(dir / "g.dbck"), CheckpointIntegrityError);

  std::ofstream(dir / "t.dbck", std::ios::binary) << good.substr(0, good.size() - 100);
  EXPECT_THROW(load_checkpoint(dir / "t.dbck"), CheckpointIntegrityError);

  EXPECT_THROW(load_checkpoint(dir / "absent.dbck"), Error);
}

TEST(Checkpoint, NamedStateMustMatchExactly) {
  ClassifierModel model = random_model(BackboneId::EfficientNet);
  auto state = named_state(*model);
  state.back().second = torch::zeros({3});
  EXPECT_THROW(load_named_state(*model, state, "test"), CheckpointError);
  state.pop_back();
  EXPECT_THROW(load_named_state(*model, state, "test"), CheckpointError);
}

TEST(Checkpoint, BackboneWeightsFeedThePretrainedPath) {
  TempDir dir;
  ClassifierModel source = random_model(BackboneId::EfficientNet, 8);
  save_backbone_weights(source->backbone(), BackboneId::EfficientNet,
                        pretrained_weight_path(BackboneId::EfficientNet, dir.path()));
  ModelOptions o;
  o.cache_dir = dir.path();
  o.head_seed = 99;
  ClassifierModel loaded = build_model(BackboneId::EfficientNet, o);
  EXPECT_EQ(loaded->weight_source(), WeightSource::Pretrained);
  const auto a = named_state(source->backbone());
  const auto b = named_state(loaded->backbone());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(torch::equal(a[i].second, b[i].second));

  // Weights saved for one backbone are refused by another.
  fs::copy_file(pretrained_weight_path(BackboneId::EfficientNet, dir.path()),
                pretrained_weight_path(BackboneId::DenseNet169, dir.path()));
  EXPECT_THROW(build_model(BackboneId::DenseNet169, o), AcquisitionError);
}
