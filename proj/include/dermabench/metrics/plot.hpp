#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "dermabench/metrics/confusion.hpp"
#include "dermabench/training/history.hpp"

namespace dermabench::metrics {

struct CurveFiles {
  std::filesystem::path accuracy_plot;
  std::filesystem::path loss_plot;
  std::filesystem::path csv;
};

/// Writes <prefix>-accuracy.png, <prefix>-loss.png (train and validation
/// series against epoch) and <prefix>-history.csv. Rendering is fully
/// deterministic: the same history always yields the same bytes.
/// Throws RenderError for an empty history.
CurveFiles render_curves(const training::TrainingHistory& history,
                         const std::filesystem::path& prefix,
                         const std::string& model_name);

/// Cell layout of a rendered confusion matrix. Rows are the true class,
/// columns the predicted class, positive class first.
struct ConfusionGrid {
  std::array<LesionLabel, 2> order;
  std::array<std::array<std::size_t, 2>, 2> counts;
};

ConfusionGrid confusion_grid(const ConfusionMatrix& cm);

/// 2x2 annotated heatmap (PNG). Throws RenderError when the matrix is empty.
void render_confusion(const ConfusionMatrix& cm,
                      const std::filesystem::path& output_path,
                      const std::string& title);

}  // namespace dermabench::metrics
