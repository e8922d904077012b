#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the library's numerical routines.

#include <cmath>
#include <cstdint>
#include <vector>

#include "roaddbn/rbm.hpp"

namespace oracle {

inline int bit(std::uint64_t pattern, int i) { return static_cast<int>((pattern >> i) & 1U); }

// E(v,h) as the literal triple sum.
inline double energy(const roaddbn::RbmParams& p, std::uint64_t v, std::uint64_t h) {
  const int I = static_cast<int>(p.b.size());
  const int J = static_cast<int>(p.c.size());
  double e = 0.0;
  for (int i = 0; i < I; ++i) e -= p.b[i] * bit(v, i);
  for (int j = 0; j < J; ++j) e -= p.c[j] * bit(h, j);
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) e -= bit(v, i) * p.W(i, j) * bit(h, j);
  }
  return e;
}

inline double partition(const roaddbn::RbmParams& p) {
  const int I = static_cast<int>(p.b.size());
  const int J = static_cast<int>(p.c.size());
  long double z = 0.0L;
  for (std::uint64_t v = 0; v < (1ULL << I); ++v) {
    for (std::uint64_t h = 0; h < (1ULL << J); ++h) z += std::exp(static_cast<long double>(-energy(p, v, h)));
  }
  return static_cast<double>(z);
}

// p(v) by summing the joint over every hidden configuration.
inline std::vector<double> visible_marginals(const roaddbn::RbmParams& p) {
  const int I = static_cast<int>(p.b.size());
  const int J = static_cast<int>(p.c.size());
  const double z = partition(p);
  std::vector<double> out(1ULL << I, 0.0);
  for (std::uint64_t v = 0; v < out.size(); ++v) {
    long double total = 0.0L;
    for (std::uint64_t h = 0; h < (1ULL << J); ++h) total += std::exp(static_cast<long double>(-energy(p, v, h)));
    out[v] = static_cast<double>(total) / z;
  }
  return out;
}

// KL(data || model) for a uniform distribution over the given patterns.
inline double kl_uniform_patterns(const roaddbn::RbmParams& p, const std::vector<std::uint64_t>& patterns) {
  const auto model = visible_marginals(p);
  const double q = 1.0 / static_cast<double>(patterns.size());
  double kl = 0.0;
  for (auto v : patterns) kl += q * std::log(q / model[v]);
  return kl;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace oracle
