#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "roaddbn/dbn.hpp"
#include "roaddbn/graph.hpp"
#include "roaddbn/raster.hpp"

namespace roaddbn {

enum class Action { Walk, Stop };

const char* to_string(Action action);

/// Window sizes the encoder accepts.
inline constexpr int kWindowSizes[] = {16, 32, 64, 128};

struct DecisionConfig {
  int window = 64;          ///< d
  int angle_bins = 64;      ///< a
  double graph_stroke = 3.0;

  void validate() const;
};

/// d x d x 4 network input: R, G, B and graph planes, each row-major with
/// row 0 at the top of the window. All values in [0, 1].
struct DecisionInput {
  int window = 0;
  Vector values;

  double at(int channel, int col, int row) const {
    return values[(static_cast<Index>(channel) * window + row) * window + col];
  }
  Vector graph_plane() const { return values.tail(static_cast<Index>(window) * window); }
};

struct DecisionOutput {
  double walk = 0.5;
  double stop = 0.5;
  Vector angle;  ///< one sigmoid activation per angle bin
};

struct DecisionLabel {
  Action action = Action::Stop;
  int angle_bin = -1;  ///< meaningful only for Walk

  friend bool operator==(const DecisionLabel&, const DecisionLabel&) = default;
};

struct ActionChoice {
  Action action = Action::Stop;
  std::optional<double> alpha;  ///< radians in [0, 2*pi), set for Walk
};

/// Center angle of bin i: 2*pi*(i + 0.5)/a.
double bin_center(int bin, int angle_bins);

/// Bin containing `alpha` (any real angle, wrapped into [0, 2*pi)).
int angle_to_bin(double alpha, int angle_bins);

/// Crops the d x d window around `center` (zero outside the image) and
/// renders `graph` as antialiased strokes into the fourth plane. The window
/// is anchored at the pixel nearest to `center`; its pixel (d/2, d/2) is that
/// pixel.
DecisionInput encode_input(const Image& image, const RoadGraph& graph, const Point& center,
                           const DecisionConfig& config);

/// Forward pass through the stack and the output head.
DecisionOutput infer_decision(const DbnStack& stack, const DecisionInput& input);

/// Head outputs for a batch of input rows.
std::vector<DecisionOutput> infer_rows(const DbnStack& stack, const Matrix& input_rows);

/// Walk iff O_walk > T, at the center of the highest angle bin (lowest index
/// on ties).
ActionChoice select_action(const DecisionOutput& output, double threshold);

/// Labeled inputs stored as 8-bit quantized rows.
class DecisionDataset final : public SampleSource {
 public:
  DecisionDataset(int window, int angle_bins);

  void add(const DecisionInput& input, const DecisionLabel& label);
  void add_quantized(std::vector<std::uint8_t> row, const DecisionLabel& label);

  Index size() const override { return static_cast<Index>(labels_.size()); }
  Index dim() const override { return row_size_; }
  Matrix rows(std::span<const Index> indices) const override;

  int window() const { return window_; }
  int angle_bins() const { return angle_bins_; }
  const std::vector<DecisionLabel>& labels() const { return labels_; }
  const std::uint8_t* row_data(Index n) const { return bytes_.data() + n * row_size_; }

  std::size_t walk_count() const;
  std::size_t stop_count() const;
  std::vector<std::size_t> bin_histogram() const;

  /// FNV-1a over the quantized rows and labels.
  std::uint64_t hash() const;

  /// Rows [begin, end) as a new dataset.
  DecisionDataset slice(Index begin, Index end) const;

  void reserve(std::size_t samples);

 private:
  int window_;
  int angle_bins_;
  Index row_size_;
  std::vector<std::uint8_t> bytes_;
  std::vector<DecisionLabel> labels_;
};

enum class Optimizer { Sgd, Adam };

struct HeadSchedule {
  Optimizer optimizer = Optimizer::Adam;
  int epochs = 10;
  Index batch_size = 64;
  double learning_rate = 1e-3;
  double angle_weight = 1.0;
  double angle_spread = 0.0;  ///< Gaussian target width in bins; 0 gives one-hot targets
  bool fine_tune_lower = true;  ///< false freezes every RBM and trains the head only
  std::uint64_t seed = 1;

  void validate() const;
};

struct HeadEpochReport {
  int epoch = 0;
  double loss = 0.0;
};

/// Supervised training of the head (and, unless frozen, every RBM's W and c)
/// by minibatch gradient descent on softmax cross-entropy over the action
/// plus per-bin binary cross-entropy over the angle, masked for stop labels.
/// Continues from `stack.head_epochs`, so resuming a checkpoint reproduces
/// an uninterrupted run.
DbnStack train_head(const DbnStack& stack, const DecisionDataset& dataset, const HeadSchedule& schedule,
                    const std::function<void(const HeadEpochReport&)>& on_epoch = {});

struct ActionAccuracy {
  double action = 0.0;        ///< predicted action (walk iff O_walk > O_stop) equals label
  double angle = 0.0;         ///< argmax bin equals label, over walk labels
  double angle_within_one = 0.0;
};

ActionAccuracy evaluate_decisions(const DbnStack& stack, const DecisionDataset& dataset);

}  // namespace roaddbn
