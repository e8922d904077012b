#include "roaddbn/search.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "roaddbn/errors.hpp"

namespace roaddbn {

void SearchConfig::validate() const {
  if (!(step > 0.0)) throw ConfigError("step distance D must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("walk threshold T must lie in (0, 1)");
  if (snap_radius && !(*snap_radius > 0.0)) throw ConfigError("snap radius must be positive");
  if (!(bbox.max_x >= bbox.min_x && bbox.max_y >= bbox.min_y)) throw ConfigError("bounding box is empty");
  if (step_budget == 0) throw ConfigError("step budget must be positive");
}

Point step_position(const Point& p, double step, double alpha) {
  return {p.x + step * std::cos(alpha), p.y + step * std::sin(alpha)};
}

SnapResult snap(const RoadGraph& graph, const Point& u, double radius) {
  SnapResult result{std::nullopt, u};
  double best = radius;
  const auto& vertices = graph.vertices();
  for (VertexId id = 0; id < vertices.size(); ++id) {
    const double d = distance(vertices[id], u);
    if (d < best || (d == best && !result.vertex)) {
      best = d;
      result.vertex = id;
    }
  }
  return result;
}

SearchHalt search_into(RoadGraph& graph, std::vector<TraceStep>& trace, const Image& image,
                       const Point& v0, const SearchConfig& config, const DecisionFn& decide) {
  config.validate();
  if (!config.bbox.contains(v0)) throw ArgumentError("starting location lies outside the bounding box");
  const double radius = config.snap_radius_or_default();

  std::optional<VertexId> start;
  if (config.snapping) start = snap(graph, v0, radius).vertex;
  std::vector<VertexId> stack{start ? *start : graph.add_vertex(v0)};

  std::size_t steps = 0;
  while (!stack.empty()) {
    if (steps++ >= config.step_budget) return SearchHalt::StepBudget;
    const VertexId top = stack.back();
    const Point position = graph.vertex(top);
    const ActionChoice choice = select_action(decide(graph, position, image), config.threshold);
    trace.push_back({position, choice.action, choice.alpha});

    if (choice.action == Action::Stop) {
      stack.pop_back();
      continue;
    }
    const Point u = step_position(position, config.step, *choice.alpha);
    if (!config.bbox.contains(u)) {
      stack.pop_back();
      continue;
    }
    const SnapResult snapped = config.snapping ? snap(graph, u, radius) : SnapResult{std::nullopt, u};
    if (snapped.vertex) {
      if (*snapped.vertex == top || !graph.add_edge(top, *snapped.vertex)) stack.pop_back();
      continue;
    }
    const VertexId id = graph.add_vertex(u);
    graph.add_edge(top, id);
    stack.push_back(id);
  }
  return SearchHalt::StackEmpty;
}

SearchResult search(const Image& image, const Point& v0, const SearchConfig& config,
                    const DecisionFn& decide) {
  SearchResult result;
  result.halt = search_into(result.graph, result.trace, image, v0, config, decide);
  return result;
}

SearchResult search_multi(const Image& image, const std::vector<Point>& seeds, const SearchConfig& config,
                          const DecisionFn& decide) {
  config.validate();
  SearchResult result;
  for (const Point& seed : seeds) {
    if (search_into(result.graph, result.trace, image, seed, config, decide) == SearchHalt::StepBudget) {
      result.halt = SearchHalt::StepBudget;
    }
  }
  return result;
}

void write_trace(std::ostream& out, const std::vector<TraceStep>& trace) {
  for (const auto& step : trace) {
    out << format_coordinate(step.position.x) << ' ' << format_coordinate(step.position.y) << ' '
        << to_string(step.action) << ' ' << (step.alpha ? format_coordinate(*step.alpha) : "-") << '\n';
  }
}

namespace {

double parse_field(const std::string& token, int line) {
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
    throw ParseError("invalid number '" + token + "'", line);
  }
  return value;
}

}  // namespace

std::vector<TraceStep> read_trace(std::istream& in) {
  std::vector<TraceStep> trace;
  int line_number = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string token; fields >> token;) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() != 4) throw ParseError("trace line needs 4 fields", line_number);
    TraceStep step;
    step.position = {parse_field(tokens[0], line_number), parse_field(tokens[1], line_number)};
    if (tokens[2] == "walk") {
      step.action = Action::Walk;
      step.alpha = parse_field(tokens[3], line_number);
    } else if (tokens[2] == "stop") {
      if (tokens[3] != "-") throw ParseError("stop steps carry no angle", line_number);
    } else {
      throw ParseError("action must be walk or stop", line_number);
    }
    trace.push_back(step);
  }
  return trace;
}

}  // namespace roaddbn
