#pragma once

// Constructed prediction/truth pairs with hand-counted matches at
// r_match = 8 and resampling spacing 16.

#include <string>
#include <vector>

#include "roaddbn/graph.hpp"

namespace cases {

struct Segment {
  roaddbn::Point a;
  roaddbn::Point b;
};

struct GraphSpec {
  std::vector<roaddbn::Point> points;  // isolated vertices
  std::vector<Segment> segments;       // each adds two fresh vertices and an edge
};

struct MatchCase {
  std::string name;
  GraphSpec pred;
  GraphSpec truth;
  std::size_t tp;
  std::size_t fp;
  std::size_t fn;
  double precision;  // hand-computed TP / (TP + FP)
  double recall;     // hand-computed TP / (TP + FN)
};

inline roaddbn::RoadGraph build(const GraphSpec& spec) {
  roaddbn::RoadGraph graph;
  for (const auto& p : spec.points) graph.add_vertex(p);
  for (const auto& s : spec.segments) graph.add_edge(graph.add_vertex(s.a), graph.add_vertex(s.b));
  return graph;
}

inline std::vector<roaddbn::Point> row(int count, double y, double spacing = 20.0) {
  std::vector<roaddbn::Point> points;
  for (int k = 0; k < count; ++k) points.push_back({k * spacing, y});
  return points;
}

inline const std::vector<MatchCase>& all() {
  static const std::vector<MatchCase> table{
      {"both empty", {}, {}, 0, 0, 0, 1.0, 1.0},
      {"empty prediction", {}, {{{0, 0}}, {}}, 0, 0, 1, 1.0, 0.0},
      {"empty truth", {{{0, 0}}, {}}, {}, 0, 1, 0, 0.0, 1.0},
      {"single vertex", {{{3, 3}}, {}}, {{{3, 3}}, {}}, 1, 0, 0, 1.0, 1.0},
      {"identical short edge", {{}, {{{0, 0}, {16, 0}}}}, {{}, {{{0, 0}, {16, 0}}}}, 2, 0, 0, 1.0, 1.0},
      {"identical long edge", {{}, {{{0, 0}, {32, 0}}}}, {{}, {{{0, 0}, {32, 0}}}}, 3, 0, 0, 1.0, 1.0},
      {"offset within radius", {{}, {{{0, 4}, {16, 4}}}}, {{}, {{{0, 0}, {16, 0}}}}, 2, 0, 0, 1.0, 1.0},
      {"offset beyond radius", {{}, {{{0, 10}, {16, 10}}}}, {{}, {{{0, 0}, {16, 0}}}}, 0, 2, 2, 0.0, 0.0},
      {"two predictions one truth", {{{0, 0}, {3, 0}}, {}}, {{{1, 0}}, {}}, 1, 1, 0, 0.5, 1.0},
      {"one prediction two truths", {{{1, 0}}, {}}, {{{0, 0}, {3, 0}}, {}}, 1, 0, 1, 1.0, 0.5},
      {"distance equal to radius", {{{0, 0}}, {}}, {{{8, 0}}, {}}, 1, 0, 0, 1.0, 1.0},
      {"distance just past radius", {{{0, 0}}, {}}, {{{8.0001, 0}}, {}}, 0, 1, 1, 0.0, 0.0},
      {"nearest truth wins", {{{0, 0}}, {}}, {{{5, 0}, {-7, 0}}, {}}, 1, 0, 1, 1.0, 0.5},
      {"greedy chain", {{{0, 0}, {6, 0}}, {}}, {{{3, 0}, {10, 0}}, {}}, 2, 0, 0, 1.0, 1.0},
      {"prediction overshoots", {{}, {{{0, 0}, {48, 0}}}}, {{}, {{{0, 0}, {32, 0}}}}, 3, 1, 0, 0.75, 1.0},
      {"prediction falls short", {{}, {{{0, 0}, {32, 0}}}}, {{}, {{{0, 0}, {48, 0}}}}, 3, 0, 1, 1.0, 0.75},
      {"missed component", {{}, {{{0, 0}, {16, 0}}}}, {{}, {{{0, 0}, {16, 0}}, {{100, 100}, {116, 100}}}}, 2, 0, 2, 1.0,
       0.5},
      {"spurious spur", {{}, {{{0, 0}, {16, 0}}, {{16, 0}, {16, 16}}}}, {{}, {{{0, 0}, {16, 0}}}}, 2, 2, 0, 0.5, 1.0},
      {"eight of ten truths", {row(8, 0), {}}, {row(10, 0), {}}, 8, 0, 2, 1.0, 0.8},
      {"eight of ten predictions", {row(10, 0), {}}, {row(8, 0), {}}, 8, 2, 0, 0.8, 1.0},
  };
  return table;
}

}  // namespace cases
