#include <gtest/gtest.h>

#include "dermabench/error.hpp"
#include "dermabench/modelzoo/backbone_id.hpp"
#include "dermabench/training/config.hpp"
#include "dermabench/training/history.hpp"
#include "dermabench/training/run_record.hpp"
#include "dermabench/util/files.hpp"
#include "dermabench/util/text_table.hpp"
#include "support.hpp"

using namespace dermabench;
using namespace dermabench::training;

TEST(TrainConfig, DefaultsAreTheTrainingTable) {
  const TrainConfig c;
  EXPECT_DOUBLE_EQ(c.adam.learning_rate, 0.0001);
  EXPECT_EQ(c.epochs, 20);
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_DOUBLE_EQ(c.adam.beta1, 0.9);
  EXPECT_DOUBLE_EQ(c.adam.beta2, 0.999);
  EXPECT_EQ(kLossName, "categorical_crossentropy");
  EXPECT_EQ(c.effective_micro_batch(), 64u);
}

TEST(TrainConfig, ValidationAndRoundTrip) {
  TrainConfig c;
  c.micro_batch_size = 16;
  c.seed = 77;
  EXPECT_EQ(TrainConfig::from_json(c.to_json()), c);
  EXPECT_EQ(c.fingerprint(), TrainConfig::from_json(c.to_json()).fingerprint());
  TrainConfig other = c;
  other.epochs = 3;
  EXPECT_NE(other.fingerprint(), c.fingerprint());

  TrainConfig bad;
  bad.adam.learning_rate = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.epochs = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.epochs = 0;
  EXPECT_NO_THROW(bad.validate());
}

TEST(History, CsvRoundTripIsExact) {
  TrainingHistory h;
  h.append({1, 0.123456789012345678, 0.8575, 0.2, 0.9436, 12.5, 3000});
  h.append({2, 1.0 / 3.0, 0.9, 0.1, 0.95, 11.0, 3000});
  const std::string csv = h.to_csv();
  EXPECT_EQ(csv.rfind("epoch,train_loss,train_acc,val_loss,val_acc\n", 0), 0u);
  const TrainingHistory back = TrainingHistory::from_csv(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.records()[0].train_loss, h.records()[0].train_loss);
  EXPECT_EQ(back.records()[1].train_loss, 1.0 / 3.0);
  EXPECT_EQ(back.records()[1].val_accuracy, 0.95);
  const TrainingHistory from_json = TrainingHistory::from_json(h.to_json());
  EXPECT_EQ(from_json.records()[0].val_samples, 3000u);
  EXPECT_EQ(from_json.records()[0].wall_seconds, 12.5);
}

TEST(RunRecord, RoundTripAndFileName) {
  fixtures::TempDir dir;
  RunRecord r;
  r.backbone = "densenet169";
  r.model_name = "DenseNet169";
  r.backbone_variant = "DenseNet-169";
  r.weights = "pretrained";
  r.train_config.seed = 5;
  r.augmentation = data::AugmentationConfig::table1();
  r.manifest_fingerprint = "abc";
  r.history.append({1, 0.5, 0.8, 0.4, 0.85, 1.0, 10});
  r.final_validation_loss = 0.4;
  r.final_validation_accuracy = 0.85;
  r.holdout_note = "single held-out split";
  r.save(dir / "r.json");
  const RunRecord back = RunRecord::load(dir / "r.json");
  EXPECT_EQ(back.model_name, "DenseNet169");
  EXPECT_EQ(back.train_config, r.train_config);
  EXPECT_EQ(back.augmentation, r.augmentation);
  EXPECT_EQ(back.final_validation_accuracy, r.final_validation_accuracy);
  EXPECT_FALSE(back.test_evaluation.has_value());
  EXPECT_EQ(r.file_stem("20260101T000000Z"), "run-densenet169-5-20260101T000000Z");
}

TEST(BackboneId, ParsingAndNames) {
  using modelzoo::BackboneId;
  EXPECT_EQ(modelzoo::parse_backbone("DenseNet169"), BackboneId::DenseNet169);
  EXPECT_EQ(modelzoo::parse_backbone("efficientnet-b0"), BackboneId::EfficientNet);
  EXPECT_EQ(modelzoo::parse_backbone("inception_v3"), BackboneId::InceptionV3);
  try {
    modelzoo::parse_backbone("vgg16");
    FAIL();
  } catch (const ConfigError& e) {
    for (const char* name : {"resnet101", "densenet169", "efficientnet", "inceptionv3"})
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos);
  }
  EXPECT_EQ(modelzoo::backbone_display_name(BackboneId::ResNet101), "ResNet101");
}

TEST(Files, AtomicWriteAndHash) {
  fixtures::TempDir dir;
  util::write_file_atomic(dir / "f.txt", "hello");
  EXPECT_EQ(util::read_file(dir / "f.txt"), "hello");
  EXPECT_EQ(util::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(util::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(util::to_hex(0xabcULL), "0000000000000abc");
  EXPECT_THROW(util::read_file(dir / "nope"), FilesystemError);
}

TEST(TextTable, AlignsColumns) {
  util::TextTable t({"Model", "Acc"});
  t.add_row({"A", "0.9"});
  t.add_row({"Longer", "0.95"});
  const std::string out = t.render();
  EXPECT_NE(out.find("Model    Acc"), std::string::npos);
  EXPECT_NE(out.find("A        0.9"), std::string::npos);
  EXPECT_NE(out.find("Longer  0.95"), std::string::npos);
}
