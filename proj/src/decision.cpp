#include "roaddbn/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "roaddbn/errors.hpp"
#include "roaddbn/random.hpp"

namespace roaddbn {

const char* to_string(Action action) { return action == Action::Walk ? "walk" : "stop"; }

void DecisionConfig::validate() const {
  if (std::find(std::begin(kWindowSizes), std::end(kWindowSizes), window) == std::end(kWindowSizes)) {
    throw ConfigError("window size " + std::to_string(window) + " is not one of 16, 32, 64, 128");
  }
  if (angle_bins < 4) throw ConfigError("at least 4 angle bins are required");
  if (!(graph_stroke > 0.0)) throw ConfigError("graph stroke width must be positive");
}

double bin_center(int bin, int angle_bins) {
  return 2.0 * std::numbers::pi * (bin + 0.5) / angle_bins;
}

int angle_to_bin(double alpha, int angle_bins) {
  const double turn = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(alpha, turn);
  if (wrapped < 0.0) wrapped += turn;
  const int bin = static_cast<int>(std::floor(wrapped / turn * angle_bins));
  return std::clamp(bin, 0, angle_bins - 1);
}

DecisionInput encode_input(const Image& image, const RoadGraph& graph, const Point& center,
                           const DecisionConfig& config) {
  config.validate();
  if (!image.bounds().contains(center)) throw ArgumentError("window center lies outside the image");

  const int d = config.window;
  const int half = d / 2;
  const long cx = std::lround(center.x);
  const long cy = std::lround(center.y);
  const Index plane = static_cast<Index>(d) * d;

  DecisionInput input{d, Vector::Zero(4 * plane)};
  for (int row = 0; row < d; ++row) {
    const long y = cy + half - row;
    const long image_row = image.height() - 1 - y;
    if (image_row < 0 || image_row >= image.height()) continue;
    for (int col = 0; col < d; ++col) {
      const long x = cx - half + col;
      if (x < 0 || x >= image.width()) continue;
      const Color color = image.pixel(static_cast<int>(x), static_cast<int>(image_row));
      const Index at = static_cast<Index>(row) * d + col;
      input.values[at] = color.r / 255.0;
      input.values[plane + at] = color.g / 255.0;
      input.values[2 * plane + at] = color.b / 255.0;
    }
  }
  const auto graph_plane = render_graph_plane(graph, static_cast<double>(cx - half),
                                              static_cast<double>(cy + half), d, config.graph_stroke);
  for (Index at = 0; at < plane; ++at) input.values[3 * plane + at] = graph_plane[static_cast<std::size_t>(at)];
  return input;
}

namespace {

void require_head(const DbnStack& stack) {
  stack.validate();
  if (stack.head.empty()) throw StructuralError("the stack has no output head");
}

DecisionOutput output_from_logits(const Eigen::Ref<const Vector>& logits, int angle_bins) {
  DecisionOutput out;
  const double shift = std::max(logits[0], logits[1]);
  const double walk = std::exp(logits[0] - shift);
  const double stop = std::exp(logits[1] - shift);
  out.walk = walk / (walk + stop);
  out.stop = stop / (walk + stop);
  out.angle = sigmoid(Vector(logits.tail(angle_bins)));
  return out;
}

Matrix head_logits(const DbnStack& stack, const Matrix& top_rows) {
  Matrix logits = top_rows * stack.head.weights;
  logits.rowwise() += stack.head.bias.transpose();
  return logits;
}

}  // namespace

DecisionOutput infer_decision(const DbnStack& stack, const DecisionInput& input) {
  require_head(stack);
  const std::vector<Vector> layers = dbn_forward(stack, input.values);
  const Vector logits = stack.head.weights.transpose() * layers.back() + stack.head.bias;
  return output_from_logits(logits, stack.head.angle_bins);
}

std::vector<DecisionOutput> infer_rows(const DbnStack& stack, const Matrix& input_rows) {
  require_head(stack);
  if (input_rows.cols() != stack.input_dim()) throw StructuralError("input width does not match the stack");
  const Matrix logits = head_logits(stack, dbn_top(stack, input_rows));
  std::vector<DecisionOutput> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Index n = 0; n < logits.rows(); ++n) {
    out.push_back(output_from_logits(logits.row(n).transpose(), stack.head.angle_bins));
  }
  return out;
}

ActionChoice select_action(const DecisionOutput& output, double threshold) {
  if (!(output.walk > threshold)) return {Action::Stop, std::nullopt};
  if (output.angle.size() == 0) throw ArgumentError("decision output has no angle bins");
  Index best = 0;
  for (Index i = 1; i < output.angle.size(); ++i) {
    if (output.angle[i] > output.angle[best]) best = i;
  }
  return {Action::Walk, bin_center(static_cast<int>(best), static_cast<int>(output.angle.size()))};
}

// -------------------------------------------------------------------- dataset

DecisionDataset::DecisionDataset(int window, int angle_bins)
    : window_(window), angle_bins_(angle_bins), row_size_(4 * static_cast<Index>(window) * window) {
  if (window <= 0 || angle_bins < 1) throw ArgumentError("dataset needs a window and angle bins");
}

void DecisionDataset::add(const DecisionInput& input, const DecisionLabel& label) {
  if (input.window != window_) throw StructuralError("input window does not match the dataset");
  std::vector<std::uint8_t> row(static_cast<std::size_t>(row_size_));
  for (Index i = 0; i < row_size_; ++i) {
    row[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::lround(std::clamp(input.values[i], 0.0, 1.0) * 255.0));
  }
  add_quantized(std::move(row), label);
}

void DecisionDataset::add_quantized(std::vector<std::uint8_t> row, const DecisionLabel& label) {
  if (static_cast<Index>(row.size()) != row_size_) throw StructuralError("row size does not match the dataset");
  if (label.action == Action::Walk && (label.angle_bin < 0 || label.angle_bin >= angle_bins_)) {
    throw ArgumentError("walk label angle bin out of range");
  }
  bytes_.insert(bytes_.end(), row.begin(), row.end());
  labels_.push_back(label);
}

Matrix DecisionDataset::rows(std::span<const Index> indices) const {
  Matrix out(static_cast<Index>(indices.size()), row_size_);
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const std::uint8_t* src = row_data(indices[n]);
    for (Index i = 0; i < row_size_; ++i) out(static_cast<Index>(n), i) = src[i] * (1.0 / 255.0);
  }
  return out;
}

std::size_t DecisionDataset::walk_count() const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(),
                                                [](const auto& l) { return l.action == Action::Walk; }));
}

std::size_t DecisionDataset::stop_count() const { return labels_.size() - walk_count(); }

std::vector<std::size_t> DecisionDataset::bin_histogram() const {
  std::vector<std::size_t> histogram(static_cast<std::size_t>(angle_bins_), 0);
  for (const auto& label : labels_) {
    if (label.action == Action::Walk) ++histogram[static_cast<std::size_t>(label.angle_bin)];
  }
  return histogram;
}

std::uint64_t DecisionDataset::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (std::uint8_t byte : bytes_) mix(byte);
  for (const auto& label : labels_) {
    mix(label.action == Action::Walk ? 1 : 0);
    for (int shift = 0; shift < 32; shift += 8) mix(static_cast<std::uint8_t>(label.angle_bin >> shift));
  }
  return h;
}

DecisionDataset DecisionDataset::slice(Index begin, Index end) const {
  DecisionDataset out(window_, angle_bins_);
  end = std::min(end, size());
  for (Index n = begin; n < end; ++n) {
    out.add_quantized(std::vector<std::uint8_t>(row_data(n), row_data(n) + row_size_),
                      labels_[static_cast<std::size_t>(n)]);
  }
  return out;
}

void DecisionDataset::reserve(std::size_t samples) {
  bytes_.reserve(samples * static_cast<std::size_t>(row_size_));
  labels_.reserve(samples);
}

// ------------------------------------------------------------------- training

void HeadSchedule::validate() const {
  if (epochs < 0) throw ConfigError("epoch count must be non-negative");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(angle_spread >= 0.0)) throw ConfigError("angle spread must be non-negative");
  if (!(learning_rate >= 0.0) || !(angle_weight >= 0.0)) {
    throw ConfigError("learning rate and angle weight must be non-negative");
  }
}

namespace {

double angle_target(int bin, int label, int bins, double spread) {
  const int diff = std::abs(bin - label);
  const int wrapped = std::min(diff, bins - diff);
  if (spread <= 0.0) return wrapped == 0 ? 1.0 : 0.0;
  return std::exp(-0.5 * wrapped * wrapped / (spread * spread));
}

// Applies SGD or Adam updates to parameter blocks identified by slot.
class GradientStepper {
 public:
  GradientStepper(const HeadSchedule& schedule, OptimizerState state)
      : schedule_(schedule), state_(std::move(state)) {
    if (schedule_.optimizer != Optimizer::Adam) state_ = {};
  }

  void begin_step() { ++state_.steps; }

  template <typename Param, typename Grad>
  void apply(std::size_t slot, Param& param, const Grad& grad, double rate_scale = 1.0) {
    const double lr = schedule_.learning_rate * rate_scale;
    if (schedule_.optimizer == Optimizer::Sgd) {
      param -= lr * grad;
      return;
    }
    if (state_.first.size() <= slot) {
      state_.first.resize(slot + 1);
      state_.second.resize(slot + 1);
    }
    Matrix& m = state_.first[slot];
    Matrix& v = state_.second[slot];
    if (m.rows() != param.rows() || m.cols() != param.cols()) {
      m = Matrix::Zero(param.rows(), param.cols());
      v = Matrix::Zero(param.rows(), param.cols());
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double t = static_cast<double>(state_.steps);
    const double scale = lr * std::sqrt(1.0 - std::pow(beta2, t)) / (1.0 - std::pow(beta1, t));
    param.array() -= scale * m.array() / (v.array().sqrt() + eps);
  }

  const OptimizerState& state() const { return state_; }

 private:
  const HeadSchedule& schedule_;
  OptimizerState state_;
};

}  // namespace

DbnStack train_head(const DbnStack& stack, const DecisionDataset& dataset, const HeadSchedule& schedule,
                    const std::function<void(const HeadEpochReport&)>& on_epoch) {
  stack.validate();
  schedule.validate();
  if (dataset.size() == 0) throw ArgumentError("train_head needs a non-empty dataset");
  if (dataset.dim() != stack.input_dim()) throw StructuralError("dataset width does not match the stack");
  const int bins = dataset.angle_bins();
  for (const auto& label : dataset.labels()) {
    if (label.action == Action::Walk && (label.angle_bin < 0 || label.angle_bin >= bins)) {
      throw ArgumentError("label angle bin out of range");
    }
  }

  DbnStack next = stack;
  if (next.head.empty() || next.head.angle_bins != bins || next.head.weights.rows() != next.top_dim()) {
    next.head = OutputHead::zeros(next.top_dim(), bins);
    next.head_epochs = 0;
    next.optimizer = {};
  }

  const Index count = dataset.size();
  const auto layer_count = next.rbms.size();
  GradientStepper optimizer(schedule, next.optimizer);
  for (int e = 0; e < schedule.epochs; ++e) {
    const int epoch = next.head_epochs;
    std::vector<Index> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(mix_seed(schedule.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    for (Index start = 0; start < count; start += schedule.batch_size) {
      const Index stop = std::min(count, start + schedule.batch_size);
      const Index rows = stop - start;
      const std::span<const Index> batch_rows(order.data() + start, static_cast<std::size_t>(rows));
      const std::vector<Matrix> acts = dbn_forward_rows(next, dataset.rows(batch_rows));
      const Matrix logits = head_logits(next, acts.back());

      // dLoss/dlogits, averaged over the batch.
      Matrix grad = Matrix::Zero(rows, next.head.outputs());
      for (Index n = 0; n < rows; ++n) {
        const DecisionLabel& label = dataset.labels()[static_cast<std::size_t>(batch_rows[static_cast<std::size_t>(n)])];
        const DecisionOutput out = output_from_logits(logits.row(n).transpose(), bins);
        const bool walk = label.action == Action::Walk;
        grad(n, 0) = out.walk - (walk ? 1.0 : 0.0);
        grad(n, 1) = out.stop - (walk ? 0.0 : 1.0);
        loss_sum -= std::log(std::max(walk ? out.walk : out.stop, 1e-300));
        if (walk) {
          for (int i = 0; i < bins; ++i) {
            const double target = angle_target(i, label.angle_bin, bins, schedule.angle_spread);
            const double p = std::clamp(out.angle[i], 1e-15, 1.0 - 1e-15);
            grad(n, 2 + i) = schedule.angle_weight * (out.angle[i] - target);
            loss_sum -= schedule.angle_weight * (target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
          }
        }
      }
      grad /= static_cast<double>(rows);
      Matrix delta;
      if (schedule.fine_tune_lower) {
        delta = (grad * next.head.weights.transpose()).cwiseProduct(
            acts.back().cwiseProduct((1.0 - acts.back().array()).matrix()));
      }
      optimizer.begin_step();
      optimizer.apply(0, next.head.weights, acts.back().transpose() * grad);
      optimizer.apply(1, next.head.bias, grad.colwise().sum().transpose());

      if (!schedule.fine_tune_lower) continue;
      for (std::size_t l = layer_count; l-- > 0;) {
        RbmParams& rbm = next.rbms[l];
        Matrix below;
        if (l > 0) {
          below = (delta * rbm.W.transpose()).cwiseProduct(acts[l].cwiseProduct((1.0 - acts[l].array()).matrix()));
        }
        const double scale = schedule.optimizer == Optimizer::Adam
                                 ? 1.0 / std::sqrt(static_cast<double>(rbm.visible()))
                                 : 1.0;
        optimizer.apply(2 + 2 * l, rbm.W, acts[l].transpose() * delta, scale);
        optimizer.apply(3 + 2 * l, rbm.c, delta.colwise().sum().transpose(), scale);
        delta = std::move(below);
      }
    }
    ++next.head_epochs;
    next.optimizer = optimizer.state();
    if (on_epoch) on_epoch({next.head_epochs, loss_sum / static_cast<double>(count)});
  }
  next.validate();
  return next;
}

ActionAccuracy evaluate_decisions(const DbnStack& stack, const DecisionDataset& dataset) {
  if (dataset.size() == 0) throw ArgumentError("cannot evaluate on an empty dataset");
  std::size_t action_hits = 0;
  std::size_t walks = 0;
  std::size_t angle_hits = 0;
  std::size_t near_hits = 0;
  const Index chunk = 256;
  std::vector<Index> indices;
  for (Index start = 0; start < dataset.size(); start += chunk) {
    const Index stop = std::min(dataset.size(), start + chunk);
    indices.resize(static_cast<std::size_t>(stop - start));
    std::iota(indices.begin(), indices.end(), start);
    const auto outputs = infer_rows(stack, dataset.rows(indices));
    for (Index n = start; n < stop; ++n) {
      const DecisionOutput& out = outputs[static_cast<std::size_t>(n - start)];
      const DecisionLabel& label = dataset.labels()[static_cast<std::size_t>(n)];
      const Action predicted = out.walk > out.stop ? Action::Walk : Action::Stop;
      if (predicted == label.action) ++action_hits;
      if (label.action != Action::Walk) continue;
      ++walks;
      Index best = 0;
      for (Index i = 1; i < out.angle.size(); ++i) {
        if (out.angle[i] > out.angle[best]) best = i;
      }
      const int bins = dataset.angle_bins();
      const int diff = std::abs(static_cast<int>(best) - label.angle_bin);
      if (diff == 0) ++angle_hits;
      if (std::min(diff, bins - diff) <= 1) ++near_hits;
    }
  }
  ActionAccuracy accuracy;
  accuracy.action = static_cast<double>(action_hits) / static_cast<double>(dataset.size());
  if (walks > 0) {
    accuracy.angle = static_cast<double>(angle_hits) / static_cast<double>(walks);
    accuracy.angle_within_one = static_cast<double>(near_hits) / static_cast<double>(walks);
  }
  return accuracy;
}

}  // namespace roaddbn
