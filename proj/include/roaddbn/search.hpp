#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roaddbn/decision.hpp"
#include "roaddbn/graph.hpp"
#include "roaddbn/raster.hpp"

namespace roaddbn {

/// decision func(G, S_top, Image). Must be pure in its arguments for a
/// search to be reproducible.
using DecisionFn = std::function<DecisionOutput(const RoadGraph&, const Point&, const Image&)>;

struct SearchConfig {
  Box bbox;
  double step = 16.0;                ///< D, pixels
  double threshold = 0.3;            ///< T
  std::optional<double> snap_radius; ///< unset means D/2
  bool snapping = true;
  std::size_t step_budget = 100000;

  double snap_radius_or_default() const { return snap_radius ? *snap_radius : 0.5 * step; }
  void validate() const;
};

struct TraceStep {
  Point position;  ///< S_top when the decision was taken
  Action action = Action::Stop;
  std::optional<double> alpha;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

enum class SearchHalt { StackEmpty, StepBudget };

struct SearchResult {
  RoadGraph graph;
  std::vector<TraceStep> trace;
  SearchHalt halt = SearchHalt::StackEmpty;
};

/// S_top + (D cos(alpha), D sin(alpha)), alpha counterclockwise from +x.
Point step_position(const Point& p, double step, double alpha);

struct SnapResult {
  std::optional<VertexId> vertex;  ///< nearest existing vertex within the radius
  Point position;                  ///< the query point when no vertex was found
};

/// Nearest vertex within `radius` of u (lowest id on ties), else u itself.
SnapResult snap(const RoadGraph& graph, const Point& u, double radius);

/// Iterative graph construction from v0.
///
/// A walk whose target snaps onto an existing vertex adds the connecting edge
/// without pushing that vertex. If the edge already exists the step cannot
/// make progress and S_top is popped, as for a stop.
SearchResult search(const Image& image, const Point& v0, const SearchConfig& config,
                    const DecisionFn& decide);

/// Runs the search loop on an existing graph. v0 snaps onto an existing
/// vertex when one is in range. Returns the steps taken.
SearchHalt search_into(RoadGraph& graph, std::vector<TraceStep>& trace, const Image& image,
                       const Point& v0, const SearchConfig& config, const DecisionFn& decide);

/// One search per seed on a shared, snapped graph.
SearchResult search_multi(const Image& image, const std::vector<Point>& seeds, const SearchConfig& config,
                          const DecisionFn& decide);

/// Trace file: one line per step, `<x> <y> <walk|stop> <alpha|->`.
void write_trace(std::ostream& out, const std::vector<TraceStep>& trace);
std::vector<TraceStep> read_trace(std::istream& in);

}  // namespace roaddbn
