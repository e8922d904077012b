#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace roaddbn {

/// Position in pixel units, mathematical axes (y grows upward).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

/// Axis-aligned rectangle, inclusive bounds.
struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(const Point& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

using VertexId = std::size_t;
using Edge = std::pair<VertexId, VertexId>;  ///< stored with first < second

/// Undirected road graph with no self-loops and no duplicate edges.
class RoadGraph {
 public:
  VertexId add_vertex(Point p);

  /// Returns false (and changes nothing) for a duplicate edge. Throws
  /// ArgumentError for self-loops or unknown endpoints.
  bool add_edge(VertexId a, VertexId b);

  bool has_edge(VertexId a, VertexId b) const;

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Point& vertex(VertexId id) const { return vertices_.at(id); }
  const std::vector<VertexId>& neighbors(VertexId id) const { return adjacency_.at(id); }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return vertices_.empty(); }

  /// Copy containing the first `vertex_count` vertices and `edge_count` edges.
  RoadGraph prefix(std::size_t vertex_count, std::size_t edge_count) const;

  /// Connected components as vertex lists, ordered by lowest vertex id.
  std::vector<std::vector<VertexId>> components() const;

  friend bool operator==(const RoadGraph& a, const RoadGraph& b) {
    return a.vertices_ == b.vertices_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<VertexId>> adjacency_;
  std::set<Edge> edge_set_;
};

/// ROADGRAPH text format:
///
///     ROADGRAPH 1
///     V <id> <x> <y>
///     E <id1> <id2>
///
/// Coordinates use the shortest decimal form that round-trips exactly.
void write_graph(std::ostream& out, const RoadGraph& graph);
RoadGraph read_graph(std::istream& in);
void save_graph(const std::string& path, const RoadGraph& graph);
RoadGraph load_graph(const std::string& path);

std::string format_coordinate(double value);

}  // namespace roaddbn
