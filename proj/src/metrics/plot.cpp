#include "dermabench/metrics/plot.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "dermabench/error.hpp"
#include "dermabench/util/files.hpp"
#include "dermabench/util/text_table.hpp"

namespace dermabench::metrics {

namespace fs = std::filesystem;

namespace {

const cv::Scalar kWhite(255, 255, 255);
const cv::Scalar kBlack(0, 0, 0);
const cv::Scalar kGrid(225, 225, 225);
const cv::Scalar kTrainColour(180, 119, 31);   // BGR, blue
const cv::Scalar kValColour(14, 127, 255);     // BGR, orange
constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

void put_text_centred(cv::Mat& img, const std::string& text, cv::Point centre,
                      double scale, const cv::Scalar& colour, int thickness = 1) {
  int baseline = 0;
  const cv::Size size = cv::getTextSize(text, kFont, scale, thickness, &baseline);
  cv::putText(img, text, {centre.x - size.width / 2, centre.y + size.height / 2},
              kFont, scale, colour, thickness, cv::LINE_AA);
}

void put_text_vertical(cv::Mat& img, const std::string& text, cv::Point centre,
                       double scale) {
  int baseline = 0;
  const cv::Size size = cv::getTextSize(text, kFont, scale, 1, &baseline);
  cv::Mat label(size.height + baseline + 4, size.width + 4, CV_8UC3, kWhite);
  cv::putText(label, text, {2, size.height + 2}, kFont, scale, kBlack, 1, cv::LINE_AA);
  cv::Mat rotated;
  cv::rotate(label, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
  const cv::Rect roi(centre.x - rotated.cols / 2, centre.y - rotated.rows / 2,
                     rotated.cols, rotated.rows);
  rotated.copyTo(img(roi & cv::Rect(0, 0, img.cols, img.rows)));
}

void write_png(const cv::Mat& img, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::vector<uchar> bytes;
  if (!cv::imencode(".png", img, bytes))
    throw RenderError("PNG encoding failed for " + path.string());
  util::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                                 bytes.size()));
}

struct Series {
  std::string name;
  std::vector<double> values;
  cv::Scalar colour;
};

cv::Mat line_plot(const std::string& title, const std::string& y_label,
                  const std::vector<int>& epochs, const std::vector<Series>& series) {
  constexpr int kWidth = 800, kHeight = 560;
  constexpr int kLeft = 90, kRight = 30, kTop = 60, kBottom = 70;
  cv::Mat img(kHeight, kWidth, CV_8UC3, kWhite);
  const cv::Rect area(kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series)
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-9) {
    lo -= 0.05;
    hi += 0.05;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  double x_lo = epochs.front();
  double x_hi = epochs.back();
  if (x_hi - x_lo < 1e-9) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  auto to_px = [&](double x, double y) {
    const double fx = (x - x_lo) / (x_hi - x_lo);
    const double fy = (y - lo) / (hi - lo);
    return cv::Point(area.x + static_cast<int>(std::lround(fx * area.width)),
                     area.y + area.height - static_cast<int>(std::lround(fy * area.height)));
  };

  constexpr int kYTicks = 5;
  for (int i = 0; i <= kYTicks; ++i) {
    const double y = lo + (hi - lo) * i / kYTicks;
    const cv::Point p = to_px(x_lo, y);
    cv::line(img, {area.x, p.y}, {area.x + area.width, p.y}, kGrid, 1);
    const std::string label = util::fixed(y, 3);
    int baseline = 0;
    const cv::Size size = cv::getTextSize(label, kFont, 0.45, 1, &baseline);
    cv::putText(img, label, {area.x - size.width - 8, p.y + size.height / 2}, kFont,
                0.45, kBlack, 1, cv::LINE_AA);
  }
  const std::size_t stride = std::max<std::size_t>(1, (epochs.size() + 9) / 10);
  for (std::size_t i = 0; i < epochs.size(); i += stride) {
    const cv::Point p = to_px(epochs[i], lo);
    cv::line(img, {p.x, area.y}, {p.x, area.y + area.height}, kGrid, 1);
    put_text_centred(img, std::to_string(epochs[i]), {p.x, area.y + area.height + 18}, 0.45,
                     kBlack);
  }
  cv::rectangle(img, area, kBlack, 1);

  for (const auto& s : series) {
    std::vector<cv::Point> points;
    for (std::size_t i = 0; i < s.values.size(); ++i)
      points.push_back(to_px(epochs[i], s.values[i]));
    if (points.size() > 1)
      cv::polylines(img, points, false, s.colour, 2, cv::LINE_AA);
    for (const auto& p : points) cv::circle(img, p, 4, s.colour, cv::FILLED, cv::LINE_AA);
  }

  // Legend, upper right of the plot area.
  int legend_y = area.y + 20;
  for (const auto& s : series) {
    const int x = area.x + area.width - 150;
    cv::line(img, {x, legend_y}, {x + 30, legend_y}, s.colour, 2, cv::LINE_AA);
    cv::circle(img, {x + 15, legend_y}, 4, s.colour, cv::FILLED, cv::LINE_AA);
    cv::putText(img, s.name, {x + 40, legend_y + 5}, kFont, 0.5, kBlack, 1, cv::LINE_AA);
    legend_y += 24;
  }

  put_text_centred(img, title, {kWidth / 2, kTop / 2}, 0.7, kBlack, 2);
  put_text_centred(img, "Epoch", {area.x + area.width / 2, kHeight - 22}, 0.55, kBlack);
  put_text_vertical(img, y_label, {24, area.y + area.height / 2}, 0.55);
  return img;
}

// White to dark blue.
cv::Scalar heat_colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto mix = [t](double a, double b) { return a + (b - a) * t; };
  return {mix(255, 107), mix(255, 48), mix(255, 8)};
}

}  // namespace

CurveFiles render_curves(const training::TrainingHistory& history,
                         const fs::path& prefix, const std::string& model_name) {
  if (history.empty()) throw RenderError("cannot plot an empty training history");
  std::vector<int> epochs;
  Series train_acc{"train", {}, kTrainColour}, val_acc{"validation", {}, kValColour};
  Series train_loss{"train", {}, kTrainColour}, val_loss{"validation", {}, kValColour};
  for (const auto& r : history.records()) {
    epochs.push_back(r.epoch);
    train_acc.values.push_back(r.train_accuracy);
    val_acc.values.push_back(r.val_accuracy);
    train_loss.values.push_back(r.train_loss);
    val_loss.values.push_back(r.val_loss);
  }
  CurveFiles files{prefix, prefix, prefix};
  files.accuracy_plot += "-accuracy.png";
  files.loss_plot += "-loss.png";
  files.csv += "-history.csv";

  write_png(line_plot("Model accuracy of " + model_name, "Accuracy", epochs,
                      {train_acc, val_acc}),
            files.accuracy_plot);
  write_png(line_plot("Model loss of " + model_name, "Loss", epochs, {train_loss, val_loss}),
            files.loss_plot);
  util::write_file_atomic(files.csv, history.to_csv());
  return files;
}

ConfusionGrid confusion_grid(const ConfusionMatrix& cm) {
  const LesionLabel pos = cm.positive;
  const LesionLabel neg =
      pos == LesionLabel::Malignant ? LesionLabel::Benign : LesionLabel::Malignant;
  return {{pos, neg}, {{{cm.tp, cm.fn}, {cm.fp, cm.tn}}}};
}

void render_confusion(const ConfusionMatrix& cm, const fs::path& output_path,
                      const std::string& title) {
  if (cm.total() == 0) throw RenderError("cannot plot an empty confusion matrix");
  const ConfusionGrid grid = confusion_grid(cm);
  constexpr int kCell = 180, kLeft = 170, kTop = 90;
  constexpr int kWidth = kLeft + 2 * kCell + 40, kHeight = kTop + 2 * kCell + 90;
  cv::Mat img(kHeight, kWidth, CV_8UC3, kWhite);

  std::size_t max_count = 1;
  for (const auto& row : grid.counts)
    for (std::size_t c : row) max_count = std::max(max_count, c);

  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const std::size_t count = grid.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      const double t = static_cast<double>(count) / static_cast<double>(max_count);
      const cv::Rect cell(kLeft + c * kCell, kTop + r * kCell, kCell, kCell);
      cv::rectangle(img, cell, heat_colour(t), cv::FILLED);
      cv::rectangle(img, cell, kBlack, 1);
      put_text_centred(img, std::to_string(count),
                       {cell.x + kCell / 2, cell.y + kCell / 2}, 1.0,
                       t > 0.5 ? kWhite : kBlack, 2);
    }
    const std::string name(data::label_display_name(grid.order[static_cast<std::size_t>(r)]));
    put_text_centred(img, name, {kLeft - 60, kTop + r * kCell + kCell / 2}, 0.55, kBlack);
    put_text_centred(img, name, {kLeft + r * kCell + kCell / 2, kTop + 2 * kCell + 22}, 0.55,
                     kBlack);
  }
  put_text_centred(img, title, {kWidth / 2, 30}, 0.7, kBlack, 2);
  put_text_centred(img, "Predicted label", {kLeft + kCell, kTop + 2 * kCell + 60}, 0.55,
                   kBlack);
  put_text_vertical(img, "True label", {22, kTop + kCell}, 0.55);
  write_png(img, output_path);
}

}  // namespace dermabench::metrics
