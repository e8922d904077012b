#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace roaddbn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Largest I+J accepted by exact enumeration (2^22 joint configurations).
inline constexpr int kMaxEnumerationUnits = 22;

/// Logit magnitude at which the logistic function is clamped.
inline constexpr double kSigmoidClamp = 30.0;

double sigmoid(double x);
Vector sigmoid(const Vector& x);
Matrix sigmoid(const Matrix& x);

/// A layer state with every unit exactly 0 or 1.
class BinaryVector {
 public:
  BinaryVector(std::initializer_list<int> bits);
  explicit BinaryVector(const std::vector<int>& bits);
  explicit BinaryVector(const Vector& values);

  /// Bit i of `bits` becomes unit i.
  static BinaryVector from_bits(std::uint64_t bits, int length);

  const Vector& values() const { return values_; }
  Index size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// Parameter triple of one RBM: visible biases b (I), hidden biases c (J),
/// weights W (I x J).
struct RbmParams {
  Vector b;
  Vector c;
  Matrix W;

  Index visible() const { return b.size(); }
  Index hidden() const { return c.size(); }

  /// Throws StructuralError on inconsistent shapes or non-finite entries.
  void validate() const;

  static RbmParams zeros(Index visible, Index hidden);

  /// Zero biases, weights uniform in [-0.01, 0.01].
  static RbmParams initialized(Index visible, Index hidden, std::uint64_t seed);
};

/// Training samples, one per row. Entries in [0,1]; non-binary entries are
/// Bernoulli probabilities for the visible units.
class TrainBatch {
 public:
  explicit TrainBatch(Matrix samples);
  explicit TrainBatch(const std::vector<BinaryVector>& samples);

  const Matrix& samples() const { return samples_; }
  Index size() const { return samples_.rows(); }
  Index dim() const { return samples_.cols(); }
  bool empty() const { return samples_.rows() == 0; }

 private:
  Matrix samples_;
};

double energy(const RbmParams& params, const BinaryVector& v, const BinaryVector& h);

/// Z by enumerating all 2^(I+J) configurations. Throws CapacityError above
/// the enumeration bound.
double partition_exact(const RbmParams& params);

double joint_prob_exact(const RbmParams& params, const BinaryVector& v, const BinaryVector& h);

/// Exact joint distribution of a small RBM, with Z computed once.
class ExactDistribution {
 public:
  explicit ExactDistribution(const RbmParams& params);

  double partition() const { return z_; }
  double joint(const BinaryVector& v, const BinaryVector& h) const;

  /// p(v) with v given as a bit pattern over the I visible units.
  double marginal_visible(std::uint64_t v_bits) const;

 private:
  RbmParams params_;
  double z_;
};

/// p(h_j = 1 | v) for every hidden unit.
Vector hidden_conditional(const RbmParams& params, const BinaryVector& v);

/// p(v_i = 1 | h) for every visible unit.
Vector visible_conditional(const RbmParams& params, const BinaryVector& h);

/// Row-wise conditionals for a batch of (possibly real-valued) states.
Matrix hidden_probabilities(const RbmParams& params, const Matrix& visible_rows);
Matrix visible_probabilities(const RbmParams& params, const Matrix& hidden_rows);

struct CdOptions {
  int k = 1;
  double learning_rate = 0.1;
};

/// One CD-k step over the whole batch. Deterministic for a fixed seed.
RbmParams cd_update(const RbmParams& params, const TrainBatch& batch, const CdOptions& options,
                    std::uint64_t seed);

/// Mean squared difference between the samples and their one-step
/// mean-field reconstructions.
double reconstruction_error(const RbmParams& params, const TrainBatch& batch);

}  // namespace roaddbn
