#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "roaddbn/rbm.hpp"

namespace roaddbn {

/// Walking Distance accumulators for the hidden units of one RBM.
///
/// dc[j] and dW[j] are exponentially smoothed magnitudes of the epoch-to-epoch
/// change in hidden bias c_j and weight column W_{.j}.
struct WdTrace {
  Vector dc;
  Vector dW;
  int epoch = 0;
  double gamma = 0.9;

  static WdTrace zeros(Index hidden, double gamma);

  Index size() const { return dc.size(); }

  /// dc[j] * dW[j], the per-neuron fluctuation score.
  Vector scores() const { return dc.cwiseProduct(dW); }
  double total() const { return scores().sum(); }
};

struct StructureThresholds {
  double generation = 0.05;             ///< theta_G
  double annihilation = 0.05;           ///< theta_A
  std::optional<double> layer_wd;       ///< theta_L_wd; unset means 0.1 * J
  double layer_energy = 0.0;            ///< theta_L_energy
  Index max_hidden = 1024;              ///< J_max
  int max_layers = 8;                   ///< L_max

  double layer_wd_for(Index hidden) const {
    return layer_wd ? *layer_wd : 0.1 * static_cast<double>(hidden);
  }

  void validate() const;
};

WdTrace update_wd(const WdTrace& trace, const RbmParams& prev, const RbmParams& curr);

/// Indices j with dc_j * dW_j > theta_G, truncated so J never passes J_max.
std::vector<Index> check_generation(const WdTrace& trace, const StructureThresholds& thresholds);

/// Appends a perturbed copy of hidden unit j (perturbation at most 1e-3 per
/// entry) and a zeroed trace slot.
std::pair<RbmParams, WdTrace> generate_neuron(const RbmParams& params, const WdTrace& trace, Index j,
                                              std::uint64_t seed, Index max_hidden = 1024);

/// Hidden units whose mean activation over the batch is below theta_A or
/// above 1 - theta_A. Never lists every unit: the least extreme one is kept.
std::vector<Index> check_annihilation(const RbmParams& params, const TrainBatch& batch,
                                      const StructureThresholds& thresholds);

std::pair<RbmParams, WdTrace> annihilate_neuron(const RbmParams& params, const WdTrace& trace,
                                                Index j);

/// Mean of E(v, E[h|v]) over the batch.
double mean_energy(const RbmParams& params, const TrainBatch& batch);

}  // namespace roaddbn
