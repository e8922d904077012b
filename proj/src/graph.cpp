#include "roaddbn/graph.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "roaddbn/errors.hpp"

namespace roaddbn {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

VertexId RoadGraph::add_vertex(Point p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ArgumentError("vertex position must be finite");
  vertices_.push_back(p);
  adjacency_.emplace_back();
  return vertices_.size() - 1;
}

bool RoadGraph::add_edge(VertexId a, VertexId b) {
  if (a >= vertices_.size() || b >= vertices_.size()) throw ArgumentError("edge endpoint out of range");
  if (a == b) throw ArgumentError("self-loops are not allowed");
  const Edge edge = a < b ? Edge{a, b} : Edge{b, a};
  if (!edge_set_.insert(edge).second) return false;
  edges_.push_back(edge);
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
  return true;
}

bool RoadGraph::has_edge(VertexId a, VertexId b) const {
  return edge_set_.count(a < b ? Edge{a, b} : Edge{b, a}) > 0;
}

RoadGraph RoadGraph::prefix(std::size_t vertex_count, std::size_t edge_count) const {
  RoadGraph out;
  for (std::size_t v = 0; v < vertex_count && v < vertices_.size(); ++v) out.add_vertex(vertices_[v]);
  for (std::size_t e = 0; e < edge_count && e < edges_.size(); ++e) {
    if (edges_[e].second < out.vertex_count()) out.add_edge(edges_[e].first, edges_[e].second);
  }
  return out;
}

std::vector<std::vector<VertexId>> RoadGraph::components() const {
  std::vector<std::vector<VertexId>> out;
  std::vector<bool> seen(vertices_.size(), false);
  for (VertexId start = 0; start < vertices_.size(); ++start) {
    if (seen[start]) continue;
    std::vector<VertexId> component{start};
    seen[start] = true;
    for (std::size_t k = 0; k < component.size(); ++k) {
      for (VertexId next : adjacency_[component[k]]) {
        if (!seen[next]) {
          seen[next] = true;
          component.push_back(next);
        }
      }
    }
    out.push_back(std::move(component));
  }
  return out;
}

// --------------------------------------------------------------------- text I/O

std::string format_coordinate(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

void write_graph(std::ostream& out, const RoadGraph& graph) {
  out << "ROADGRAPH 1\n";
  const auto& vertices = graph.vertices();
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    out << "V " << v << ' ' << format_coordinate(vertices[v].x) << ' '
        << format_coordinate(vertices[v].y) << '\n';
  }
  for (const auto& [a, b] : graph.edges()) out << "E " << a << ' ' << b << '\n';
}

namespace {

double parse_double(const std::string& token, int line) {
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError("invalid coordinate '" + token + "'", line);
  }
  return value;
}

std::size_t parse_id(const std::string& token, int line) {
  std::size_t value = 0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
    throw ParseError("invalid vertex id '" + token + "'", line);
  }
  return value;
}

}  // namespace

RoadGraph read_graph(std::istream& in) {
  RoadGraph graph;
  int line_number = 0;
  bool header = false;
  bool in_edges = false;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string token; fields >> token;) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (!header) {
      if (tokens.size() != 2 || tokens[0] != "ROADGRAPH" || tokens[1] != "1") {
        throw ParseError("expected header 'ROADGRAPH 1'", line_number);
      }
      header = true;
      continue;
    }
    if (tokens[0] == "V") {
      if (in_edges) throw ParseError("vertex record after edge records", line_number);
      if (tokens.size() != 4) throw ParseError("vertex record needs 'V <id> <x> <y>'", line_number);
      if (parse_id(tokens[1], line_number) != graph.vertex_count()) {
        throw ParseError("vertex ids must be dense and ascending from 0", line_number);
      }
      graph.add_vertex({parse_double(tokens[2], line_number), parse_double(tokens[3], line_number)});
    } else if (tokens[0] == "E") {
      in_edges = true;
      if (tokens.size() != 3) throw ParseError("edge record needs 'E <id1> <id2>'", line_number);
      const auto a = parse_id(tokens[1], line_number);
      const auto b = parse_id(tokens[2], line_number);
      if (a >= graph.vertex_count() || b >= graph.vertex_count()) {
        throw ParseError("edge references unknown vertex", line_number);
      }
      if (a == b) throw ParseError("self-loop edge", line_number);
      if (!graph.add_edge(a, b)) throw ParseError("duplicate edge", line_number);
    } else {
      throw ParseError("unknown record '" + tokens[0] + "'", line_number);
    }
  }
  if (!header) throw ParseError("missing 'ROADGRAPH 1' header", line_number + 1);
  return graph;
}

void save_graph(const std::string& path, const RoadGraph& graph) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  write_graph(out, graph);
  if (!out) throw FileError("write to '" + path + "' failed");
}

RoadGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  return read_graph(in);
}

}  // namespace roaddbn
