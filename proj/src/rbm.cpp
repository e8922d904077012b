#include "roaddbn/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roaddbn/errors.hpp"
#include "roaddbn/random.hpp"

namespace roaddbn {

double sigmoid(double x) {
  const double clamped = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-clamped));
}

Vector sigmoid(const Vector& x) {
  return x.unaryExpr([](double value) { return sigmoid(value); });
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double value) { return sigmoid(value); });
}

// ---------------------------------------------------------------- BinaryVector

namespace {

void require_binary(const Vector& values) {
  if (values.size() == 0) throw ArgumentError("binary vector must be non-empty");
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0 && values[i] != 1.0) {
      throw ArgumentError("binary vector entry " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

}  // namespace

BinaryVector::BinaryVector(std::initializer_list<int> bits)
    : BinaryVector(std::vector<int>(bits)) {}

BinaryVector::BinaryVector(const std::vector<int>& bits) : values_(static_cast<Index>(bits.size())) {
  for (std::size_t i = 0; i < bits.size(); ++i) values_[static_cast<Index>(i)] = bits[i];
  require_binary(values_);
}

BinaryVector::BinaryVector(const Vector& values) : values_(values) { require_binary(values_); }

BinaryVector BinaryVector::from_bits(std::uint64_t bits, int length) {
  if (length <= 0 || length > 64) throw ArgumentError("bit length must be in [1, 64]");
  Vector values(length);
  for (int i = 0; i < length; ++i) values[i] = static_cast<double>((bits >> i) & 1U);
  return BinaryVector(values);
}

// ------------------------------------------------------------------ RbmParams

void RbmParams::validate() const {
  if (W.rows() != b.size() || W.cols() != c.size()) {
    throw StructuralError("RBM shape mismatch: |b|=" + std::to_string(b.size()) +
                          " |c|=" + std::to_string(c.size()) + " W=" + std::to_string(W.rows()) +
                          "x" + std::to_string(W.cols()));
  }
  if (!b.allFinite() || !c.allFinite() || !W.allFinite()) {
    throw StructuralError("RBM parameters contain non-finite values");
  }
}

RbmParams RbmParams::zeros(Index visible, Index hidden) {
  if (visible <= 0 || hidden <= 0) throw ArgumentError("RBM layers must be non-empty");
  return RbmParams{Vector::Zero(visible), Vector::Zero(hidden), Matrix::Zero(visible, hidden)};
}

RbmParams RbmParams::initialized(Index visible, Index hidden, std::uint64_t seed) {
  RbmParams params = zeros(visible, hidden);
  Rng rng(seed);
  for (Index j = 0; j < hidden; ++j) {
    for (Index i = 0; i < visible; ++i) params.W(i, j) = rng.uniform(-0.01, 0.01);
  }
  return params;
}

// ----------------------------------------------------------------- TrainBatch

TrainBatch::TrainBatch(Matrix samples) : samples_(std::move(samples)) {
  if (!samples_.allFinite() || (samples_.size() > 0 &&
                                (samples_.minCoeff() < 0.0 || samples_.maxCoeff() > 1.0))) {
    throw ArgumentError("training samples must lie in [0, 1]");
  }
}

TrainBatch::TrainBatch(const std::vector<BinaryVector>& samples) {
  if (samples.empty()) return;
  const Index dim = samples.front().size();
  samples_.resize(static_cast<Index>(samples.size()), dim);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (samples[n].size() != dim) throw StructuralError("training samples differ in length");
    samples_.row(static_cast<Index>(n)) = samples[n].values().transpose();
  }
}

// ---------------------------------------------------------- exact quantities

namespace {

void require_layer_sizes(const RbmParams& params, Index v_size, Index h_size) {
  params.validate();
  if (v_size != params.visible() || h_size != params.hidden()) {
    throw StructuralError("state sizes (" + std::to_string(v_size) + ", " +
                          std::to_string(h_size) + ") do not match RBM (" +
                          std::to_string(params.visible()) + ", " +
                          std::to_string(params.hidden()) + ")");
  }
}

void require_enumerable(const RbmParams& params) {
  params.validate();
  if (params.visible() + params.hidden() > kMaxEnumerationUnits) {
    throw CapacityError("exact enumeration limited to I+J <= " +
                        std::to_string(kMaxEnumerationUnits));
  }
}

// Sum over all hidden states of exp(-E(v, h)) for one visible state.
double hidden_sum(const RbmParams& params, const Vector& v) {
  const double visible_term = params.b.dot(v);
  const Vector field = params.c + params.W.transpose() * v;
  const Index hidden = params.hidden();
  const std::uint64_t count = std::uint64_t{1} << hidden;
  double total = 0.0;
  for (std::uint64_t h = 0; h < count; ++h) {
    double exponent = visible_term;
    for (Index j = 0; j < hidden; ++j) {
      if ((h >> j) & 1U) exponent += field[j];
    }
    total += std::exp(exponent);
  }
  return total;
}

Vector bits_to_vector(std::uint64_t bits, Index length) {
  Vector values(length);
  for (Index i = 0; i < length; ++i) values[i] = static_cast<double>((bits >> i) & 1U);
  return values;
}

}  // namespace

double energy(const RbmParams& params, const BinaryVector& v, const BinaryVector& h) {
  require_layer_sizes(params, v.size(), h.size());
  const Vector& vv = v.values();
  const Vector& hh = h.values();
  return -params.b.dot(vv) - params.c.dot(hh) - vv.dot(params.W * hh);
}

double partition_exact(const RbmParams& params) {
  require_enumerable(params);
  const std::uint64_t count = std::uint64_t{1} << params.visible();
  double z = 0.0;
  for (std::uint64_t v = 0; v < count; ++v) z += hidden_sum(params, bits_to_vector(v, params.visible()));
  return z;
}

double joint_prob_exact(const RbmParams& params, const BinaryVector& v, const BinaryVector& h) {
  return ExactDistribution(params).joint(v, h);
}

ExactDistribution::ExactDistribution(const RbmParams& params)
    : params_(params), z_(partition_exact(params)) {}

double ExactDistribution::joint(const BinaryVector& v, const BinaryVector& h) const {
  return std::exp(-energy(params_, v, h)) / z_;
}

double ExactDistribution::marginal_visible(std::uint64_t v_bits) const {
  return hidden_sum(params_, bits_to_vector(v_bits, params_.visible())) / z_;
}

// ---------------------------------------------------------------- conditionals

Vector hidden_conditional(const RbmParams& params, const BinaryVector& v) {
  require_layer_sizes(params, v.size(), params.hidden());
  return sigmoid(Vector(params.c + params.W.transpose() * v.values()));
}

Vector visible_conditional(const RbmParams& params, const BinaryVector& h) {
  require_layer_sizes(params, params.visible(), h.size());
  return sigmoid(Vector(params.b + params.W * h.values()));
}

Matrix hidden_probabilities(const RbmParams& params, const Matrix& visible_rows) {
  if (visible_rows.cols() != params.visible()) {
    throw StructuralError("batch width does not match visible layer");
  }
  Matrix logits = visible_rows * params.W;
  logits.rowwise() += params.c.transpose();
  return sigmoid(logits);
}

Matrix visible_probabilities(const RbmParams& params, const Matrix& hidden_rows) {
  if (hidden_rows.cols() != params.hidden()) {
    throw StructuralError("batch width does not match hidden layer");
  }
  Matrix logits = hidden_rows * params.W.transpose();
  logits.rowwise() += params.b.transpose();
  return sigmoid(logits);
}

// ------------------------------------------------------------------- training

namespace {

Matrix sample_bernoulli(const Matrix& probabilities, Rng& rng) {
  Matrix out(probabilities.rows(), probabilities.cols());
  // Column-major traversal fixes the draw order.
  for (Index col = 0; col < probabilities.cols(); ++col) {
    for (Index row = 0; row < probabilities.rows(); ++row) {
      out(row, col) = rng.uniform() < probabilities(row, col) ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace

RbmParams cd_update(const RbmParams& params, const TrainBatch& batch, const CdOptions& options,
                    std::uint64_t seed) {
  params.validate();
  if (batch.empty()) throw ArgumentError("cd_update needs a non-empty batch");
  if (batch.dim() != params.visible()) throw StructuralError("batch width does not match visible layer");
  if (options.k < 1) throw ArgumentError("CD step count k must be >= 1");
  if (!(options.learning_rate >= 0.0)) throw ArgumentError("learning rate must be non-negative");

  Rng rng(seed);
  const double n = static_cast<double>(batch.size());

  const Matrix v0 = sample_bernoulli(batch.samples(), rng);
  const Matrix ph0 = hidden_probabilities(params, v0);

  Matrix vk = v0;
  Matrix phk = ph0;
  Matrix hk = sample_bernoulli(ph0, rng);
  for (int step = 0; step < options.k; ++step) {
    vk = sample_bernoulli(visible_probabilities(params, hk), rng);
    phk = hidden_probabilities(params, vk);
    if (step + 1 < options.k) hk = sample_bernoulli(phk, rng);
  }

  const double scale = options.learning_rate / n;
  RbmParams next = params;
  next.W.noalias() += scale * (v0.transpose() * ph0 - vk.transpose() * phk);
  next.b += scale * (v0 - vk).colwise().sum().transpose();
  next.c += scale * (ph0 - phk).colwise().sum().transpose();
  return next;
}

double reconstruction_error(const RbmParams& params, const TrainBatch& batch) {
  params.validate();
  if (batch.empty()) throw ArgumentError("reconstruction_error needs a non-empty batch");
  const Matrix& x = batch.samples();
  const Matrix recon = visible_probabilities(params, hidden_probabilities(params, x));
  return (x - recon).squaredNorm() / static_cast<double>(x.size());
}

}  // namespace roaddbn
