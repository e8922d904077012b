#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "roaddbn/graph.hpp"

namespace roaddbn {

/// Outcome of one-to-one vertex matching between prediction and truth.
struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (pred, truth) resampled indices
  double radius = 0.0;
};

/// Original vertices plus evenly spaced interior points on every edge so
/// that no gap along an edge exceeds `spacing`.
std::vector<Point> resample(const RoadGraph& graph, double spacing);

/// Greedy matching by ascending distance among pairs within `radius`, after
/// resampling both graphs to `spacing`. Distance ties break on (pred, truth)
/// index order.
MatchResult match_vertices(const RoadGraph& pred, const RoadGraph& truth, double radius, double spacing);

/// Matching on raw point sets, without resampling.
MatchResult match_points(const std::vector<Point>& pred, const std::vector<Point>& truth, double radius);

/// TP / (TP + FP); 1 when nothing was predicted.
double precision(const MatchResult& match);

/// TP / (TP + FN); 1 when the truth is empty.
double recall(const MatchResult& match);

struct EvalRun {
  std::string label;
  MatchResult match;
  double seconds = 0.0;
};

/// Model / Precision / Recall / Time(minutes) table, percentages and minutes
/// to one decimal. `delimiter` selects the machine-readable form.
std::string report_table(const std::vector<EvalRun>& runs);
std::string report_dsv(const std::vector<EvalRun>& runs, char delimiter = '\t');

}  // namespace roaddbn
