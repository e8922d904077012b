#include "roaddbn/structure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roaddbn/errors.hpp"
#include "roaddbn/random.hpp"

namespace roaddbn {

namespace {

constexpr double kCopyPerturbation = 1e-3;

void require_trace_matches(const RbmParams& params, const WdTrace& trace) {
  if (trace.dc.size() != params.hidden() || trace.dW.size() != params.hidden()) {
    throw StructuralError("WD trace length " + std::to_string(trace.dc.size()) +
                          " does not match hidden layer " + std::to_string(params.hidden()));
  }
}

Vector remove_entry(const Vector& values, Index j) {
  Vector out(values.size() - 1);
  out.head(j) = values.head(j);
  out.tail(values.size() - j - 1) = values.tail(values.size() - j - 1);
  return out;
}

Vector append_entry(const Vector& values, double entry) {
  Vector out(values.size() + 1);
  out.head(values.size()) = values;
  out[values.size()] = entry;
  return out;
}

}  // namespace

WdTrace WdTrace::zeros(Index hidden, double gamma) {
  return WdTrace{Vector::Zero(hidden), Vector::Zero(hidden), 0, gamma};
}

void StructureThresholds::validate() const {
  if (!(generation > 0.0) || !(annihilation > 0.0) || (layer_wd && !(*layer_wd > 0.0))) {
    throw ConfigError("structure thresholds must be positive");
  }
  if (max_hidden < 1 || max_layers < 1) throw ConfigError("structure caps must be >= 1");
}

WdTrace update_wd(const WdTrace& trace, const RbmParams& prev, const RbmParams& curr) {
  if (prev.visible() != curr.visible() || prev.hidden() != curr.hidden()) {
    throw StructuralError("update_wd needs parameters of identical shape");
  }
  require_trace_matches(curr, trace);
  if (!(trace.gamma >= 0.0 && trace.gamma < 1.0)) throw ArgumentError("gamma must lie in [0, 1)");

  WdTrace next = trace;
  const double keep = trace.gamma;
  const double blend = 1.0 - trace.gamma;
  next.dc = keep * trace.dc + blend * (curr.c - prev.c).cwiseAbs();
  next.dW = keep * trace.dW + blend * (curr.W - prev.W).colwise().norm().transpose();
  ++next.epoch;
  return next;
}

std::vector<Index> check_generation(const WdTrace& trace, const StructureThresholds& thresholds) {
  std::vector<Index> out;
  const Index room = thresholds.max_hidden - trace.size();
  if (room <= 0) return out;
  const Vector scores = trace.scores();
  for (Index j = 0; j < scores.size() && static_cast<Index>(out.size()) < room; ++j) {
    if (scores[j] > thresholds.generation) out.push_back(j);
  }
  return out;
}

std::pair<RbmParams, WdTrace> generate_neuron(const RbmParams& params, const WdTrace& trace, Index j,
                                              std::uint64_t seed, Index max_hidden) {
  params.validate();
  require_trace_matches(params, trace);
  if (j < 0 || j >= params.hidden()) throw ArgumentError("neuron index out of range");
  if (params.hidden() >= max_hidden) throw CapacityError("hidden layer already at J_max");

  Rng rng(seed);
  RbmParams next;
  next.b = params.b;
  next.c = append_entry(params.c, params.c[j] + rng.uniform(-kCopyPerturbation, kCopyPerturbation));
  next.W.resize(params.visible(), params.hidden() + 1);
  next.W.leftCols(params.hidden()) = params.W;
  for (Index i = 0; i < params.visible(); ++i) {
    next.W(i, params.hidden()) = params.W(i, j) + rng.uniform(-kCopyPerturbation, kCopyPerturbation);
  }

  WdTrace next_trace = trace;
  next_trace.dc = append_entry(trace.dc, 0.0);
  next_trace.dW = append_entry(trace.dW, 0.0);
  return {std::move(next), std::move(next_trace)};
}

std::vector<Index> check_annihilation(const RbmParams& params, const TrainBatch& batch,
                                      const StructureThresholds& thresholds) {
  if (batch.empty()) throw ArgumentError("check_annihilation needs a non-empty batch");
  const Vector mean = hidden_probabilities(params, batch.samples()).colwise().mean().transpose();

  std::vector<Index> flagged;
  for (Index j = 0; j < mean.size(); ++j) {
    if (mean[j] < thresholds.annihilation || mean[j] > 1.0 - thresholds.annihilation) {
      flagged.push_back(j);
    }
  }
  if (static_cast<Index>(flagged.size()) == mean.size()) {
    // Keep the unit whose mean activation is closest to 0.5.
    const auto keep = std::min_element(flagged.begin(), flagged.end(), [&](Index a, Index b) {
      return std::abs(mean[a] - 0.5) < std::abs(mean[b] - 0.5);
    });
    flagged.erase(keep);
  }
  return flagged;
}

std::pair<RbmParams, WdTrace> annihilate_neuron(const RbmParams& params, const WdTrace& trace,
                                                Index j) {
  params.validate();
  require_trace_matches(params, trace);
  if (j < 0 || j >= params.hidden()) throw ArgumentError("neuron index out of range");
  if (params.hidden() < 2) throw StructuralError("cannot annihilate the last hidden neuron");

  const Index hidden = params.hidden();
  RbmParams next;
  next.b = params.b;
  next.c = remove_entry(params.c, j);
  next.W.resize(params.visible(), hidden - 1);
  next.W.leftCols(j) = params.W.leftCols(j);
  next.W.rightCols(hidden - j - 1) = params.W.rightCols(hidden - j - 1);

  WdTrace next_trace = trace;
  next_trace.dc = remove_entry(trace.dc, j);
  next_trace.dW = remove_entry(trace.dW, j);
  return {std::move(next), std::move(next_trace)};
}

double mean_energy(const RbmParams& params, const TrainBatch& batch) {
  if (batch.empty()) throw ArgumentError("mean_energy needs a non-empty batch");
  const Matrix& v = batch.samples();
  const Matrix h = hidden_probabilities(params, v);
  const Vector per_sample = -(v * params.b) - (h * params.c) - (v * params.W).cwiseProduct(h).rowwise().sum();
  return per_sample.mean();
}

}  // namespace roaddbn
