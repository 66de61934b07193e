#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dermabench/cli/commands.hpp"
#include "dermabench/cli/config.hpp"
#include "dermabench/data/image.hpp"
#include "dermabench/data/manifest.hpp"
#include "dermabench/error.hpp"
#include "dermabench/modelzoo/checkpoint.hpp"
#include "dermabench/training/trainer.hpp"
#include "dermabench/util/files.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace dermabench;
using namespace dermabench::cli;
using fixtures::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "dermabench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<fs::path> files_in(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().string().ends_with(suffix)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(CliConfig, DefaultsFileAndFlagsAreLayered) {
  TempDir dir;
  const CliConfig defaults = load_config(std::nullopt);
  EXPECT_DOUBLE_EQ(defaults.train_fraction, 0.7);
  EXPECT_EQ(defaults.training.epochs, 20);
  EXPECT_EQ(defaults.backbones.size(), 4u);
  EXPECT_EQ(defaults.origin.at("training.epochs"), "default");

  std::ofstream(dir / "c.ini") << "[training]\nepochs = 3\n[data]\nseed = 9\n";
  CliConfig c = load_config(dir / "c.ini");
  EXPECT_EQ(c.training.epochs, 3);
  EXPECT_EQ(c.training.seed, 9u);
  EXPECT_EQ(c.origin.at("training.epochs"), "file");
  set_value(c, "training.epochs", "5", "flag");
  EXPECT_EQ(c.training.epochs, 5);
  EXPECT_EQ(c.to_json().at("training").at("epochs").at("origin"), "flag");
  EXPECT_NE(c.describe().find("training.epochs = 5"), std::string::npos);

  std::ofstream(dir / "bad.ini") << "[training]\nepoch = 3\n";
  EXPECT_THROW(load_config(dir / "bad.ini"), ConfigError);
  EXPECT_THROW(set_value(c, "data.workers", "0", "flag"), ConfigError);
  EXPECT_THROW(set_value(c, "training.learning_rate", "fast", "flag"), ConfigError);
  EXPECT_THROW(set_value(c, "models.backbones", "resnet101,vgg", "flag"), ConfigError);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"split"}).code, kExitUsage);  // no dataset root
  EXPECT_EQ(run({"split", "--root", "/nonexistent/dermabench"}).code, kExitUsage);
  const Outcome bad = run({"train", "--backbone", "vgg16"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("densenet169"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, SplitIsByteIdenticalOnRerun) {
  TempDir dir;
  fixtures::make_class_tree(dir / "data", 10, 10, 8);
  const std::string root = (dir / "data").string();
  const Outcome first = run({"split", "--root", root, "--output-dir", (dir / "a").string()});
  ASSERT_EQ(first.code, kExitOk) << first.err;
  EXPECT_NE(first.out.find("benign 7/3, malignant 7/3"), std::string::npos);
  ASSERT_EQ(run({"split", "--root", root, "--output-dir", (dir / "b").string()}).code, kExitOk);
  ASSERT_EQ(run({"split", "--root", root, "--output-dir", (dir / "c").string(), "--seed", "8"})
                .code,
            kExitOk);
  const std::string a = util::read_file(dir / "a" / "manifest.json");
  EXPECT_EQ(a, util::read_file(dir / "b" / "manifest.json"));
  EXPECT_NE(a, util::read_file(dir / "c" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "reports" / "config-split.json"));
}

TEST(Cli, TrainEvaluatePredictCompare) {
  TempDir dir;
  fixtures::make_class_tree(dir / "data", 5, 5, 8);
  fixtures::write_solid_image(dir / "extra" / "red.png", {255, 0, 0});
  std::ofstream(dir / "extra" / "broken.jpg") << "not an image";
  const std::string out = (dir / "out").string();
  const std::vector<std::string> common{"--output-dir", out, "--weights", "random"};
  const auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), common.begin(), common.end());
    return run(std::move(args));
  };

  ASSERT_EQ(with({"split", "--root", (dir / "data").string(), "--fraction", "0.6"}).code, kExitOk);
  const Outcome trained = with({"train", "--backbone", "efficientnet", "--epochs", "1",
                                "--batch-size", "4"});
  ASSERT_EQ(trained.code, kExitOk) << trained.err;
  EXPECT_NE(trained.out.find("epoch 1/1"), std::string::npos) << trained.out;
  const auto checkpoints = files_in(dir / "out" / "checkpoints", ".dbck");
  ASSERT_EQ(checkpoints.size(), 1u);
  const std::string ckpt = checkpoints[0].string();

  const Outcome evaluated = with({"evaluate", "--checkpoint", ckpt});
  ASSERT_EQ(evaluated.code, kExitOk) << evaluated.err;
  const auto eval_doc = nlohmann::json::parse(util::read_file(
      dir / "out" / "reports" / (checkpoints[0].stem().string() + "-evaluation.json")));
  EXPECT_EQ(eval_doc.at("samples"), 4);

  // The CLI prediction path and the evaluation path agree per image.
  const auto manifest = data::DatasetManifest::load(dir / "out" / "manifest.json");
  std::vector<fs::path> val_paths;
  for (const auto& e : manifest.entries())
    if (e.split == data::Split::Validation) val_paths.push_back(manifest.root() / e.path);
  modelzoo::ClassifierModel model = modelzoo::load_checkpoint(ckpt);
  data::ManifestBatchStream stream(manifest, data::Split::Validation, {3});
  const auto reference = training::evaluate(*model, stream);
  const auto predicted = predict_images(*model, val_paths, 2, ckpt);
  ASSERT_EQ(predicted.size(), reference.per_sample.size());
  for (std::size_t i = 0; i < predicted.size(); ++i)
    for (int k = 0; k < 2; ++k)
      EXPECT_NEAR(predicted[i].probabilities[k], reference.per_sample[i].probabilities[k], 1e-6);

  const Outcome mixed = with({"predict", "--checkpoint", ckpt, (dir / "extra" / "red.png").string(),
                              (dir / "extra" / "broken.jpg").string()});
  EXPECT_EQ(mixed.code, kExitOk) << mixed.err;
  const auto pred_doc =
      nlohmann::json::parse(util::read_file(dir / "out" / "reports" / "predictions.json"));
  ASSERT_EQ(pred_doc.at("predictions").size(), 2u);
  EXPECT_TRUE(pred_doc.at("predictions")[0].contains("label"));
  EXPECT_TRUE(pred_doc.at("predictions")[1].contains("error"));
  EXPECT_EQ(with({"predict", "--checkpoint", ckpt, (dir / "extra" / "broken.jpg").string()}).code,
            kExitFailure);
  EXPECT_EQ(with({"predict", "--checkpoint", ckpt}).code, kExitUsage);
  EXPECT_EQ(with({"evaluate", "--checkpoint", (dir / "nope.dbck").string()}).code, kExitFailure);

  const Outcome compared = with({"compare", "--with-literature"});
  ASSERT_EQ(compared.code, kExitOk) << compared.err;
  EXPECT_NE(compared.out.find("EfficientNet"), std::string::npos);
  EXPECT_NE(compared.out.find("Xception"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "reports" / "comparison.csv"));
  EXPECT_FALSE(files_in(dir / "out" / "reports", "-accuracy.png").empty());
  EXPECT_FALSE(files_in(dir / "out" / "reports", "-confusion.png").empty());
}

TEST(Cli, TrainWithoutSplitAsksForIt) {
  TempDir dir;
  const Outcome r = run({"train", "--output-dir", (dir / "out").string(), "--weights", "random"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("split"), std::string::npos);
}

TEST(Cli, AugmentPreviewIsReproducible) {
  TempDir dir;
  fixtures::write_noise_image(dir / "lesion.png", 5, 40, 48);
  const std::string image = (dir / "lesion.png").string();
  for (const char* out : {"a", "b"})
    ASSERT_EQ(run({"augment-preview", "--image", image, "-n", "3", "--output-dir",
                   (dir / out).string()})
                  .code,
              kExitOk);
  const auto a = files_in(dir / "a" / "augment-preview", ".png");
  const auto b = files_in(dir / "b" / "augment-preview", ".png");
  ASSERT_EQ(a.size(), 3u);
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(util::read_file(a[i]), util::read_file(b[i]));
  EXPECT_EQ(run({"augment-preview", "--image", image, "-n", "0", "--output-dir",
                 (dir / "a").string()})
                .code,
            kExitUsage);
}

TEST(Cli, IdentityPreviewIsTheResizedInput) {
  TempDir dir;
  fixtures::write_noise_image(dir / "lesion.png", 6, 30, 30);
  std::ofstream(dir / "id.ini") << "[augmentation]\nzoom_range = 0\nrotation_range = 0\n"
                                   "horizontal_flip = false\nvertical_flip = false\n";
  ASSERT_EQ(run({"--config", (dir / "id.ini").string(), "augment-preview", "--image",
                 (dir / "lesion.png").string(), "-n", "1", "--output-dir", (dir / "o").string()})
                .code,
            kExitOk);
  const auto files = files_in(dir / "o" / "augment-preview", ".png");
  ASSERT_EQ(files.size(), 1u);
  const auto expected = data::load_image(dir / "lesion.png", data::kModelInputSize);
  const auto written = data::load_image(files[0], data::kModelInputSize);
  ASSERT_EQ(expected.pixels().size(), written.pixels().size());
  for (std::size_t i = 0; i < expected.pixels().size(); ++i)
    ASSERT_NEAR(expected.pixels()[i], written.pixels()[i], 0.5 / 255.0 + 1e-6);
}
