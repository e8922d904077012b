#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roaddbn/rbm.hpp"
#include "roaddbn/structure.hpp"

namespace roaddbn {

/// Supervised output layer on top of the last RBM: 2 action logits followed
/// by `angle_bins` angle logits.
struct OutputHead {
  Matrix weights;  ///< J_top x (2 + angle_bins)
  Vector bias;     ///< 2 + angle_bins
  int angle_bins = 0;

  bool empty() const { return angle_bins == 0; }
  Index outputs() const { return 2 + angle_bins; }

  static OutputHead zeros(Index inputs, int angle_bins);
};

enum class StructureEventKind { Generation, Annihilation, Layer };

/// One line of the structure log:
/// `epoch=<e> event=gen|ann|layer j=<j|-> J=<J> L=<L>`.
/// J is the affected layer's hidden size after the event, L the layer count.
struct StructureEvent {
  int epoch = 0;
  StructureEventKind kind = StructureEventKind::Generation;
  Index neuron = -1;  ///< -1 for layer events
  Index hidden = 0;
  int layers = 0;

  std::string to_line() const;
  static StructureEvent parse(const std::string& line, int line_number = 0);
  friend bool operator==(const StructureEvent&, const StructureEvent&) = default;
};

/// Adam moment estimates kept with a stack so that supervised training can
/// resume exactly. Slots: head weights, head bias, then (W, c) per layer.
struct OptimizerState {
  long steps = 0;
  std::vector<Matrix> first;
  std::vector<Matrix> second;

  bool empty() const { return steps == 0; }
};

struct DbnStack {
  std::vector<RbmParams> rbms;
  OutputHead head;
  std::vector<StructureEvent> log;
  int head_epochs = 0;  ///< supervised epochs already applied
  OptimizerState optimizer;

  Index input_dim() const { return rbms.front().visible(); }
  Index top_dim() const { return rbms.back().hidden(); }
  int layers() const { return static_cast<int>(rbms.size()); }

  /// Input size followed by every hidden size, plus the head width if present.
  std::vector<Index> shape() const;

  /// Throws StructuralError unless every layer's I equals the previous J.
  void validate() const;

  static DbnStack single(RbmParams rbm);
};

/// Rows of training data served on demand, so large image datasets never
/// need to be materialized as one dense matrix.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual Index size() const = 0;
  virtual Index dim() const = 0;
  virtual Matrix rows(std::span<const Index> indices) const = 0;
};

class MatrixSource final : public SampleSource {
 public:
  explicit MatrixSource(Matrix samples) : samples_(std::move(samples)) {}
  Index size() const override { return samples_.rows(); }
  Index dim() const override { return samples_.cols(); }
  Matrix rows(std::span<const Index> indices) const override;

 private:
  Matrix samples_;
};

bool check_layer_generation(const DbnStack& stack, const WdTrace& trace, const TrainBatch& batch,
                            const StructureThresholds& thresholds);

DbnStack push_layer(const DbnStack& stack, Index hidden, std::uint64_t seed);

/// Activations per layer; entry 0 is the input itself.
std::vector<Vector> dbn_forward(const DbnStack& stack, const Vector& input);

/// Batch form of dbn_forward, one sample per row.
std::vector<Matrix> dbn_forward_rows(const DbnStack& stack, const Matrix& input_rows);

/// Conditional means of the top RBM layer only.
Matrix dbn_top(const DbnStack& stack, const Matrix& input_rows);

struct PretrainSchedule {
  Index initial_hidden = 32;
  Index new_layer_hidden = 32;
  int epochs_per_layer = 10;
  Index batch_size = 64;
  CdOptions cd;
  double gamma = 0.9;
  std::uint64_t seed = 1;
  Index probe_size = 512;  ///< samples used by the annihilation and energy checks

  void validate() const;
};

struct EpochReport {
  int epoch = 0;
  int layer = 0;
  Index hidden = 0;
  double reconstruction = 0.0;
  double wd_total = 0.0;
};

/// Greedy layer-wise pretraining with neuron generation/annihilation after
/// every epoch and a layer-generation check after each layer's epochs.
DbnStack pretrain_adaptive(const SampleSource& data, const StructureThresholds& thresholds,
                           const PretrainSchedule& schedule,
                           const std::function<void(const EpochReport&)>& on_epoch = {});

/// Layer sizes obtained by applying `log` to a one-RBM stack of shape
/// (input_dim, initial_hidden). Throws StructuralError if an event's recorded
/// sizes disagree with the replayed state.
std::vector<Index> replay_structure(Index input_dim, Index initial_hidden,
                                    const std::vector<StructureEvent>& log);

void write_structure_log(std::ostream& out, const std::vector<StructureEvent>& log);
std::vector<StructureEvent> read_structure_log(std::istream& in);

/// Stack checkpoint: `DBNSTACK 1`, the layer count, one RBMPARAMS block per
/// layer, the head, the supervised epoch count, the structure log and the
/// optimizer moments.
void write_stack(std::ostream& out, const DbnStack& stack);
DbnStack read_stack(std::istream& in);
void save_stack(const std::string& path, const DbnStack& stack);
DbnStack load_stack(const std::string& path);

/// "542, 502, 474, and 95 neurons" style summary of a layer-size list.
std::string describe_shape(const std::vector<Index>& sizes);

}  // namespace roaddbn
