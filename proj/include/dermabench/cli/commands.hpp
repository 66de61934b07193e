#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dermabench/cli/config.hpp"
#include "dermabench/data/label.hpp"
#include "dermabench/modelzoo/classifier.hpp"

namespace dermabench::cli {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Output layout under CliConfig::output_dir.
struct OutputLayout {
  std::filesystem::path root;
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path runs() const { return root / "runs"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path previews() const { return root / "augment-preview"; }
};

/// Commands return an exit code and throw dermabench::Error on failure.

int cmd_split(const CliConfig& config, std::ostream& out, std::ostream& err);

int cmd_train(const CliConfig& config, const std::optional<std::filesystem::path>& manifest,
              std::ostream& out, std::ostream& err);

int cmd_evaluate(const CliConfig& config, const std::filesystem::path& checkpoint,
                 const std::optional<std::filesystem::path>& manifest, std::ostream& out,
                 std::ostream& err);

int cmd_compare(const CliConfig& config, const std::optional<std::filesystem::path>& run_dir,
                bool with_literature, std::ostream& out, std::ostream& err);

struct PredictionResult {
  std::string image_path;
  std::string checkpoint;
  /// Unset when the image could not be decoded; `error` says why.
  std::optional<data::LesionLabel> label;
  std::array<double, 2> probabilities{0.0, 0.0};
  std::string error;
};

/// Images are decoded, resized and sent through the model in chunks of
/// `batch_size`. Undecodable images yield an error entry.
std::vector<PredictionResult> predict_images(modelzoo::ClassifierModelImpl& model,
                                             const std::vector<std::filesystem::path>& images,
                                             std::size_t batch_size,
                                             const std::string& checkpoint_id);

int cmd_predict(const CliConfig& config, const std::filesystem::path& checkpoint,
                const std::vector<std::filesystem::path>& images,
                const std::optional<std::filesystem::path>& json_path, std::ostream& out,
                std::ostream& err);

int cmd_augment_preview(const CliConfig& config, const std::filesystem::path& image, int count,
                        std::ostream& out, std::ostream& err);

/// Full command line: parsing, config resolution, dispatch and the
/// exception-to-exit-code mapping.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dermabench::cli
