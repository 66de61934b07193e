#include "dermabench/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dermabench/error.hpp"
#include "dermabench/modelzoo/preprocess.hpp"

namespace dermabench::training {

namespace {

constexpr double kProbabilityEpsilon = 1e-7;

class ModeGuard {
 public:
  explicit ModeGuard(torch::nn::Module& module)
      : module_(module), was_training_(module.is_training()) {}
  ~ModeGuard() { module_.train(was_training_); }

 private:
  torch::nn::Module& module_;
  bool was_training_;
};

}  // namespace

torch::Tensor batch_images(const data::Batch& batch) {
  return modelzoo::images_to_tensor(batch.images);
}

torch::Tensor batch_targets(const data::Batch& batch) {
  std::vector<int64_t> idx;
  idx.reserve(batch.size());
  for (auto label : batch.labels) idx.push_back(data::class_index(label));
  return torch::tensor(idx, torch::kInt64);
}

EvaluationResult evaluate(const ProbabilityFn& model, data::BatchStream& stream) {
  EvaluationResult result;
  result.per_sample.reserve(stream.sample_count());
  stream.start_epoch(0);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  while (auto batch = stream.next()) {
    const torch::Tensor probs = model(*batch).to(torch::kFloat64).contiguous();
    if (probs.dim() != 2 || probs.size(0) != static_cast<int64_t>(batch->size()) ||
        probs.size(1) != 2)
      throw EvaluationError("model output must have shape (batch, 2)");
    const auto acc = probs.accessor<double, 2>();
    for (std::size_t i = 0; i < batch->size(); ++i) {
      metrics::SamplePrediction s;
      s.true_index = data::class_index(batch->labels[i]);
      s.probabilities = {acc[i][0], acc[i][1]};
      s.predicted_index = metrics::argmax_lower_tie(s.probabilities);
      const double p = std::clamp(s.probabilities[s.true_index], kProbabilityEpsilon,
                                  1.0 - kProbabilityEpsilon);
      loss_sum -= std::log(p);
      if (s.predicted_index == s.true_index) ++correct;
      result.per_sample.push_back(s);
    }
  }
  if (result.per_sample.empty()) throw EvaluationError("cannot evaluate an empty stream");
  const double n = static_cast<double>(result.per_sample.size());
  result.loss = loss_sum / n;
  result.accuracy = static_cast<double>(correct) / n;
  return result;
}

EvaluationResult evaluate(modelzoo::ClassifierModelImpl& model, data::BatchStream& stream) {
  ModeGuard guard(model);
  model.eval();
  torch::NoGradGuard no_grad;
  const auto& prep = model.preprocessing();
  return evaluate(
      [&](const data::Batch& batch) {
        return model.forward(modelzoo::apply_preprocessing(batch_images(batch), prep));
      },
      stream);
}

TrainingHistory train(torch::nn::Module& module, const LogitsFn& logits,
                      data::BatchStream& train_stream, data::BatchStream& val_stream,
                      const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_stream.sample_count() == 0) throw ConfigError("the training stream is empty");

  TrainingHistory history;
  if (config.epochs == 0) return history;

  torch::manual_seed(config.seed);
  std::vector<torch::Tensor> params;
  for (auto& p : module.parameters())
    if (p.requires_grad()) params.push_back(p);
  if (params.empty()) throw ConfigError("model has no trainable parameters");
  torch::optim::Adam optimizer(params, torch::optim::AdamOptions(config.adam.learning_rate)
                                           .betas({config.adam.beta1, config.adam.beta2})
                                           .eps(config.adam.epsilon));

  const auto micro = static_cast<int64_t>(config.effective_micro_batch());
  ModeGuard guard(module);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    module.train(true);
    train_stream.start_epoch(static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;
    std::size_t batch_number = 0;

    while (auto batch = train_stream.next()) {
      ++batch_number;
      const torch::Tensor images = batch_images(*batch);
      const torch::Tensor targets = batch_targets(*batch);
      const int64_t n = images.size(0);
      optimizer.zero_grad();
      for (int64_t start = 0; start < n; start += micro) {
        const int64_t len = std::min(micro, n - start);
        const torch::Tensor out = logits(images.narrow(0, start, len));
        const torch::Tensor y = targets.narrow(0, start, len);
        const torch::Tensor loss = torch::nn::functional::cross_entropy(out, y);
        const double value = loss.item<double>();
        if (!std::isfinite(value))
          throw DivergenceError(epoch, batch_number,
                                "non-finite training loss at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(batch_number));
        (loss * (static_cast<double>(len) / static_cast<double>(n))).backward();
        loss_sum += value * static_cast<double>(len);
        correct += static_cast<std::size_t>(
            (out.detach().argmax(1) == y).sum().item<int64_t>());
      }
      optimizer.step();
      seen += static_cast<std::size_t>(n);
    }

    const EvaluationResult val = [&] {
      ModeGuard eval_guard(module);
      module.eval();
      torch::NoGradGuard no_grad;
      return evaluate([&](const data::Batch& b) { return torch::softmax(logits(batch_images(b)), 1); },
                      val_stream);
    }();

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(seen);
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    record.val_loss = val.loss;
    record.val_accuracy = val.accuracy;
    record.val_samples = val.per_sample.size();
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.append(record);
    if (on_epoch) on_epoch(record);
  }
  return history;
}

TrainingHistory train(modelzoo::ClassifierModelImpl& model, data::BatchStream& train_stream,
                      data::BatchStream& val_stream, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  if (config.freeze_policy != model.freeze_policy())
    throw ConfigError("train config freeze policy does not match the model");
  const auto prep = model.preprocessing();
  return train(
      model,
      [&](const torch::Tensor& images) {
        return model.logits(modelzoo::apply_preprocessing(images, prep));
      },
      train_stream, val_stream, config, on_epoch);
}

}  // namespace dermabench::training
