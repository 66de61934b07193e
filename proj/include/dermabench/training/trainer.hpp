#pragma once

#include <functional>
#include <vector>

#include <torch/torch.h>

#include "dermabench/data/batch.hpp"
#include "dermabench/metrics/confusion.hpp"
#include "dermabench/modelzoo/classifier.hpp"
#include "dermabench/training/config.hpp"
#include "dermabench/training/history.hpp"

namespace dermabench::training {

/// (N, H, W, 3) float tensor with values in [0, 1].
torch::Tensor batch_images(const data::Batch& batch);
/// (N,) int64 class indices.
torch::Tensor batch_targets(const data::Batch& batch);

struct EvaluationResult {
  double loss = 0.0;
  double accuracy = 0.0;
  /// Stream order.
  std::vector<metrics::SamplePrediction> per_sample;
};

/// Maps a batch to (N, 2) class probabilities.
using ProbabilityFn = std::function<torch::Tensor(const data::Batch&)>;

/// One pass over the stream (epoch 0). Loss is the mean cross-entropy of the
/// true-class probability clipped to [1e-7, 1 - 1e-7]; predictions use the
/// lower-index tie-break. Throws EvaluationError for an empty stream.
EvaluationResult evaluate(const ProbabilityFn& model, data::BatchStream& stream);

/// Inference mode, no autograd; restores the model's previous mode.
EvaluationResult evaluate(modelzoo::ClassifierModelImpl& model, data::BatchStream& stream);

/// Maps raw [0, 1] images, (N, H, W, 3), to (N, 2) pre-softmax scores.
using LogitsFn = std::function<torch::Tensor(const torch::Tensor&)>;

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on softmax cross-entropy for config.epochs epochs, evaluating the
/// full validation stream after each one. Training loss and accuracy are
/// averages over the epoch's batches as they were seen. Final-epoch weights
/// are kept.
///
/// Throws ConfigError for an empty train stream or an invalid config and
/// DivergenceError (1-based epoch and batch) on a non-finite loss.
TrainingHistory train(torch::nn::Module& module, const LogitsFn& logits,
                      data::BatchStream& train_stream, data::BatchStream& val_stream,
                      const TrainConfig& config, const EpochCallback& on_epoch = {});

TrainingHistory train(modelzoo::ClassifierModelImpl& model, data::BatchStream& train_stream,
                      data::BatchStream& val_stream, const TrainConfig& config,
                      const EpochCallback& on_epoch = {});

}  // namespace dermabench::training
