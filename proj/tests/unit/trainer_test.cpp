#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dermabench/error.hpp"
#include "dermabench/training/trainer.hpp"
#include "support.hpp"

using namespace dermabench;
using namespace dermabench::training;
using data::InMemoryBatchStream;
using data::LesionLabel;

namespace {

InMemoryBatchStream labelled_stream(std::vector<LesionLabel> labels, std::size_t batch = 2,
                                    int size = 4) {
  std::vector<data::ImageTensor> images;
  for (auto l : labels) images.push_back(fixtures::solid_tensor(l, size));
  return {std::move(images), std::move(labels), batch};
}

ProbabilityFn constant(double benign, double malignant) {
  return [=](const data::Batch& b) {
    const auto n = static_cast<int64_t>(b.size());
    return torch::tensor({benign, malignant}, torch::kFloat64).repeat({n, 1});
  };
}

/// Linear classifier on per-image mean colour.
struct TinyNetImpl : torch::nn::Module {
  TinyNetImpl() {
    torch::manual_seed(4);
    fc = register_module("fc", torch::nn::Linear(3, 2));
  }
  torch::Tensor forward(const torch::Tensor& nhwc) { return fc(nhwc.mean({1, 2})); }
  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(TinyNet);

LogitsFn logits_of(TinyNet& net) {
  return [&net](const torch::Tensor& x) { return net->forward(x); };
}

std::vector<torch::Tensor> snapshot(torch::nn::Module& m) {
  std::vector<torch::Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.detach().clone());
  return out;
}

TrainConfig small_config(int epochs, std::size_t batch) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  return c;
}

}  // namespace

TEST(Evaluate, ConstantBenignModel) {
  using enum LesionLabel;
  auto stream = labelled_stream({Benign, Benign, Malignant, Benign, Malignant});
  const EvaluationResult r = evaluate(constant(1.0, 0.0), stream);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.6);
  const double expected_loss = (3 * -std::log(1.0 - 1e-7) + 2 * -std::log(1e-7)) / 5;
  EXPECT_NEAR(r.loss, expected_loss, 1e-9);
  ASSERT_EQ(r.per_sample.size(), 5u);
  EXPECT_EQ(r.per_sample[2].true_index, 1);
  EXPECT_EQ(r.per_sample[2].predicted_index, 0);
}

TEST(Evaluate, TiesGoToBenign) {
  using enum LesionLabel;
  auto stream = labelled_stream({Benign, Malignant, Malignant});
  const EvaluationResult r = evaluate(constant(0.5, 0.5), stream);
  for (const auto& s : r.per_sample) EXPECT_EQ(s.predicted_index, 0);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
}

TEST(Evaluate, EmptyStreamIsAnError) {
  InMemoryBatchStream empty({}, {}, 4);
  EXPECT_THROW(evaluate(constant(0.5, 0.5), empty), EvaluationError);
}

TEST(Train, ZeroEpochsLeavesParametersUntouched) {
  using enum LesionLabel;
  TinyNet net;
  const auto before = snapshot(*net);
  auto tr = labelled_stream({Benign, Malignant});
  auto va = labelled_stream({Benign, Malignant});
  const TrainingHistory h = train(*net, logits_of(net), tr, va, small_config(0, 2));
  EXPECT_TRUE(h.empty());
  const auto after = snapshot(*net);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_TRUE(torch::equal(before[i], after[i]));
}

TEST(Train, FirstAdamStepMovesEachWeightByTheLearningRate) {
  using enum LesionLabel;
  TinyNet net;
  const auto before = snapshot(*net);
  auto tr = labelled_stream({Benign, Malignant, Malignant, Benign}, 4);
  auto va = labelled_stream({Benign});
  train(*net, logits_of(net), tr, va, small_config(1, 4));
  // With bias-corrected moments, step one is lr * g / (|g| + eps): every
  // weight with a gradient moves by lr. Green is zero in every image, so its
  // weights have none.
  const auto after = snapshot(*net);
  int moved = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const torch::Tensor delta = (after[i] - before[i]).abs().flatten();
    for (int64_t k = 0; k < delta.numel(); ++k) {
      const double d = delta[k].item<double>();
      if (d == 0.0) continue;
      EXPECT_NEAR(d, 1e-4, 1e-7);
      ++moved;
    }
  }
  EXPECT_EQ(moved, 2 * 2 + 2);  // red and blue weights of both units, both biases
}

TEST(Train, LearnsASeparableProblem) {
  std::vector<data::ImageTensor> images;
  std::vector<LesionLabel> labels;
  fixtures::separable_set(8, images, labels, 4);
  InMemoryBatchStream tr(images, labels, 4);
  InMemoryBatchStream va(images, labels, 16);
  TinyNet net;
  TrainConfig c = small_config(60, 4);
  c.adam.learning_rate = 0.05;
  std::vector<int> seen;
  const TrainingHistory h =
      train(*net, logits_of(net), tr, va, c, [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  ASSERT_EQ(h.size(), 60u);
  EXPECT_EQ(seen.front(), 1);
  EXPECT_EQ(seen.back(), 60);
  EXPECT_LT(h.back().train_loss, h.records().front().train_loss);
  EXPECT_DOUBLE_EQ(h.back().val_accuracy, 1.0);
  EXPECT_EQ(h.back().val_samples, 16u);
}

TEST(Train, MicroBatchesAccumulateToTheSameStep) {
  std::vector<data::ImageTensor> images;
  std::vector<LesionLabel> labels;
  fixtures::separable_set(4, images, labels, 4);
  images[0] = fixtures::random_tensor(9, 4, 4);
  images[5] = fixtures::random_tensor(10, 4, 4);

  const auto run = [&](std::size_t micro) {
    InMemoryBatchStream tr(images, labels, 8);
    InMemoryBatchStream va(images, labels, 8);
    TinyNet net;
    TrainConfig c = small_config(3, 8);
    c.micro_batch_size = micro;
    train(*net, logits_of(net), tr, va, c);
    return snapshot(*net);
  };
  const auto whole = run(0);
  const auto split = run(3);
  for (std::size_t i = 0; i < whole.size(); ++i)
    EXPECT_TRUE(torch::allclose(whole[i], split[i], 0, 1e-6));
}

TEST(Train, NonFiniteLossNamesEpochAndBatch) {
  using enum LesionLabel;
  TinyNet net;
  auto tr = labelled_stream({Benign, Malignant, Benign, Malignant}, 2);
  auto va = labelled_stream({Benign});
  int calls = 0;
  const LogitsFn poisoned = [&](const torch::Tensor& x) {
    torch::Tensor out = net->forward(x);
    if (++calls == 2) out = out * std::numeric_limits<float>::quiet_NaN();
    return out;
  };
  try {
    train(*net, poisoned, tr, va, small_config(2, 2));
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 1);
    EXPECT_EQ(e.batch(), 2);
  }
}

TEST(Train, RejectsEmptyStreamsAndFrozenModules) {
  using enum LesionLabel;
  TinyNet net;
  InMemoryBatchStream empty({}, {}, 2);
  auto va = labelled_stream({Benign});
  EXPECT_THROW(train(*net, logits_of(net), empty, va, small_config(1, 2)), ConfigError);

  for (auto& p : net->parameters()) p.set_requires_grad(false);
  auto tr = labelled_stream({Benign});
  EXPECT_THROW(train(*net, logits_of(net), tr, va, small_config(1, 2)), ConfigError);

  TinyNet fresh;
  TrainConfig bad = small_config(1, 0);
  EXPECT_THROW(train(*fresh, logits_of(fresh), tr, va, bad), ConfigError);
}

TEST(Train, ClassifierFreezePolicyMustMatchConfig) {
  using enum LesionLabel;
  modelzoo::ModelOptions o;
  o.weights = modelzoo::WeightSource::Random;
  modelzoo::ClassifierModel model = modelzoo::build_model(modelzoo::BackboneId::EfficientNet, o);
  auto tr = labelled_stream({Benign}, 1, 32);
  auto va = labelled_stream({Benign}, 1, 32);
  TrainConfig c = small_config(1, 1);
  c.freeze_policy = modelzoo::FreezePolicy::FrozenBackbone;
  EXPECT_THROW(train(*model, tr, va, c), ConfigError);
}

TEST(Evaluate, ClassifierModeIsRestored) {
  using enum LesionLabel;
  modelzoo::ModelOptions o;
  o.weights = modelzoo::WeightSource::Random;
  modelzoo::ClassifierModel model = modelzoo::build_model(modelzoo::BackboneId::EfficientNet, o);
  auto va = labelled_stream({Benign, Malignant, Benign}, 2, 32);
  const EvaluationResult r = evaluate(*model, va);
  EXPECT_EQ(r.per_sample.size(), 3u);
  EXPECT_TRUE(model->is_training());
  for (const auto& s : r.per_sample)
    EXPECT_NEAR(s.probabilities[0] + s.probabilities[1], 1.0, 1e-5);
}
