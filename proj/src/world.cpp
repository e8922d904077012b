#include "roaddbn/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>

#include "roaddbn/errors.hpp"
#include "roaddbn/random.hpp"

namespace roaddbn {

namespace {

constexpr double kPi = std::numbers::pi;

// Non-adjacent truth vertices keep at least this many steps apart, so no
// two roads share a snap radius and no step can cross another edge.
constexpr double kClearance = 1.6;
constexpr double kMinJunctionAngle = kPi / 4.0;

struct Walker {
  VertexId from;
  double heading;
  int steps;
};

double heading_of(const Point& a, const Point& b) { return std::atan2(b.y - a.y, b.x - a.x); }

double angle_between(double h1, double h2) {
  double d = std::fmod(std::abs(h1 - h2), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  auto orient = [](const Point& p, const Point& q, const Point& r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  };
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

// Smallest angle between `heading` and the existing edges at `v`.
double clearance_angle(const RoadGraph& graph, VertexId v, double heading) {
  double smallest = kPi;
  for (VertexId n : graph.neighbors(v)) {
    smallest = std::min(smallest, angle_between(heading, heading_of(graph.vertex(v), graph.vertex(n))));
  }
  return smallest;
}

class RoadGrower {
 public:
  RoadGrower(const WorldSpec& spec, Rng& rng) : spec_(spec), rng_(rng), margin_(spec.step) {}

  RoadGraph grow() {
    const double scale = spec_.size / 512.0;
    const int seeds = static_cast<int>(std::lround(spec_.density * 10.0 * scale * scale));
    for (int s = 0; s < seeds; ++s) plant();
    return std::move(graph_);
  }

 private:
  bool inside(const Point& p) const {
    const double hi = spec_.size - 1 - margin_;
    return p.x >= margin_ && p.y >= margin_ && p.x <= hi && p.y <= hi;
  }

  int walk_length() {
    const int span = static_cast<int>(spec_.size / spec_.step);
    return span / 2 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(span)));
  }

  // Nearest vertex within `radius` of p that is neither `from` nor adjacent to it.
  std::optional<VertexId> crowding(const Point& p, std::optional<VertexId> from, double radius) const {
    std::optional<VertexId> nearest;
    double best = radius;
    for (VertexId v = 0; v < graph_.vertex_count(); ++v) {
      if (from && (v == *from || graph_.has_edge(v, *from))) continue;
      const double d = distance(graph_.vertex(v), p);
      if (d < best) {
        best = d;
        nearest = v;
      }
    }
    return nearest;
  }

  void plant() {
    const double lo = 2.0 * spec_.step;
    const double hi = spec_.size - 1 - 2.0 * spec_.step;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const Point p{rng_.uniform(lo, hi), rng_.uniform(lo, hi)};
      if (crowding(p, std::nullopt, kClearance * spec_.step)) continue;
      const VertexId root = graph_.add_vertex(p);
      const double heading = rng_.uniform(0.0, 2.0 * kPi);
      walkers_.push_back({root, heading, walk_length()});
      walkers_.push_back({root, heading + kPi, walk_length()});
      while (!walkers_.empty()) {
        const Walker walker = walkers_.front();
        walkers_.pop_front();
        extend(walker);
      }
      return;
    }
  }

  void extend(Walker walker) {
    VertexId current = walker.from;
    double heading = walker.heading;
    for (int n = 0; n < walker.steps; ++n) {
      if (n > 0) heading += rng_.uniform(-spec_.curvature, spec_.curvature);
      const Point here = graph_.vertex(current);
      const Point next = step_position(here, spec_.step, heading);
      if (!inside(next)) return;
      if (clearance_angle(graph_, current, heading) < kMinJunctionAngle) return;
      if (auto other = crowding(next, current, kClearance * spec_.step)) {
        try_connect(current, *other);
        return;
      }
      const VertexId added = graph_.add_vertex(next);
      graph_.add_edge(current, added);
      current = added;
      if (rng_.bernoulli(spec_.branching)) {
        const double side = rng_.bernoulli(0.5) ? 1.0 : -1.0;
        const double turn = side * rng_.uniform(7.0 * kPi / 18.0, 11.0 * kPi / 18.0);
        walkers_.push_back({current, heading + turn, walk_length() / 2 + 1});
      }
    }
  }

  // Joins `from` to a nearby vertex when the link has road-like length and
  // leaves both ends at a clean junction angle.
  void try_connect(VertexId from, VertexId to) {
    const Point a = graph_.vertex(from);
    const Point b = graph_.vertex(to);
    const double length = distance(a, b);
    if (length < 0.8 * spec_.step || length > 1.25 * spec_.step) return;
    if (clearance_angle(graph_, from, heading_of(a, b)) < kMinJunctionAngle) return;
    if (clearance_angle(graph_, to, heading_of(b, a)) < kMinJunctionAngle) return;
    for (const auto& [c, d] : graph_.edges()) {
      if (c == from || c == to || d == from || d == to) continue;
      if (segments_cross(a, b, graph_.vertex(c), graph_.vertex(d))) return;
    }
    graph_.add_edge(from, to);
  }

  const WorldSpec& spec_;
  Rng& rng_;
  double margin_;
  RoadGraph graph_;
  std::deque<Walker> walkers_;
};

std::uint8_t clamp_channel(double value) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
}

Color shade(const Color& base, double offset) {
  return {clamp_channel(base.r + offset), clamp_channel(base.g + offset), clamp_channel(base.b + offset)};
}

Image paint_background(const WorldSpec& spec, Rng& rng) {
  const int size = spec.size;
  const int cell = 32;
  const int cells = size / cell + 2;
  std::vector<double> coarse(static_cast<std::size_t>(cells) * cells);
  for (double& value : coarse) value = rng.uniform(-18.0, 18.0);

  Image image(size, size);
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      const double fx = static_cast<double>(col) / cell;
      const double fy = static_cast<double>(row) / cell;
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const double tx = fx - x0;
      const double ty = fy - y0;
      auto at = [&](int x, int y) { return coarse[static_cast<std::size_t>(y) * cells + x]; };
      const double smooth = (1 - ty) * ((1 - tx) * at(x0, y0) + tx * at(x0 + 1, y0)) +
                            ty * ((1 - tx) * at(x0, y0 + 1) + tx * at(x0 + 1, y0 + 1));
      image.set_pixel(col, row, shade(spec.palette.background, smooth + rng.uniform(-10.0, 10.0)));
    }
  }
  return image;
}

void paint_clutter(Image& image, const WorldSpec& spec, Rng& rng) {
  const double scale = spec.size / 512.0;
  const int blobs = static_cast<int>(std::lround(spec.noise * 60.0 * scale * scale));
  for (int n = 0; n < blobs; ++n) {
    const double pick = rng.uniform();
    const Color base = pick < 0.6 ? spec.palette.tree : (pick < 0.8 ? spec.palette.water : spec.palette.shadow);
    Color color = shade(base, rng.uniform(-8.0, 8.0));
    if (color == spec.palette.road) color = shade(color, -1.0);
    const Point center{rng.uniform(0.0, spec.size - 1.0), rng.uniform(0.0, spec.size - 1.0)};
    if (pick >= 0.8) {
      // Shadows are elongated.
      const double angle = rng.uniform(0.0, kPi);
      const double length = rng.uniform(6.0, 20.0);
      draw_segment(image, center, step_position(center, length, angle), rng.uniform(4.0, 10.0), color);
    } else {
      draw_disc(image, center, rng.uniform(3.0, 14.0), color);
    }
  }
}

}  // namespace

void WorldSpec::validate() const {
  if (!(step > 0.0)) throw ConfigError("world step must be positive");
  if (size < 4.0 * step) throw ConfigError("world size must be at least 4 * step");
  if (!(road_width >= 1.0)) throw ConfigError("road width must be >= 1");
  for (double p : {density, branching, noise}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("density, branching and noise must lie in [0, 1]");
  }
  if (!(curvature >= 0.0 && curvature <= kPi / 4.0)) throw ConfigError("curvature must lie in [0, pi/4]");
}

World generate_world(const WorldSpec& spec) {
  spec.validate();
  Rng graph_rng(mix_seed(spec.seed, 1));
  Rng paint_rng(mix_seed(spec.seed, 2));

  World world{spec, RoadGrower(spec, graph_rng).grow(), {}};
  world.image = paint_background(spec, paint_rng);
  paint_clutter(world.image, spec, paint_rng);
  draw_graph(world.image, world.truth, spec.road_width, spec.palette.road);
  return world;
}

std::vector<Point> component_seeds(const RoadGraph& truth) {
  std::vector<Point> seeds;
  for (const auto& component : truth.components()) {
    if (component.size() > 1) seeds.push_back(truth.vertex(component.front()));
  }
  return seeds;
}

// ------------------------------------------------------------------ world I/O

void write_world_spec(std::ostream& out, const WorldSpec& spec) {
  auto color = [&](const char* key, const Color& c) {
    out << key << " = " << int{c.r} << ',' << int{c.g} << ',' << int{c.b} << '\n';
  };
  out << "size = " << spec.size << '\n'
      << "seed = " << spec.seed << '\n'
      << "density = " << format_coordinate(spec.density) << '\n'
      << "branching = " << format_coordinate(spec.branching) << '\n'
      << "curvature = " << format_coordinate(spec.curvature) << '\n'
      << "road_width = " << format_coordinate(spec.road_width) << '\n'
      << "noise = " << format_coordinate(spec.noise) << '\n'
      << "step = " << format_coordinate(spec.step) << '\n';
  color("background", spec.palette.background);
  color("road", spec.palette.road);
  color("tree", spec.palette.tree);
  color("water", spec.palette.water);
  color("shadow", spec.palette.shadow);
}

WorldSpec read_world_spec(std::istream& in) {
  WorldSpec spec;
  int line_number = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_number);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      auto color = [&]() {
        int r = 0, g = 0, b = 0;
        char c1 = 0, c2 = 0;
        std::istringstream fields(value);
        if (!(fields >> r >> c1 >> g >> c2 >> b) || c1 != ',' || c2 != ',' || r < 0 || r > 255 || g < 0 ||
            g > 255 || b < 0 || b > 255) {
          throw ParseError("invalid color '" + value + "'", line_number);
        }
        return Color{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
      };
      if (key == "size") spec.size = std::stoi(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "density") spec.density = std::stod(value);
      else if (key == "branching") spec.branching = std::stod(value);
      else if (key == "curvature") spec.curvature = std::stod(value);
      else if (key == "road_width") spec.road_width = std::stod(value);
      else if (key == "noise") spec.noise = std::stod(value);
      else if (key == "step") spec.step = std::stod(value);
      else if (key == "background") spec.palette.background = color();
      else if (key == "road") spec.palette.road = color();
      else if (key == "tree") spec.palette.tree = color();
      else if (key == "water") spec.palette.water = color();
      else if (key == "shadow") spec.palette.shadow = color();
      else throw ParseError("unknown key '" + key + "'", line_number);
    } catch (const std::logic_error&) {
      throw ParseError("invalid value for '" + key + "'", line_number);
    }
  }
  return spec;
}

void save_world(const std::string& prefix, const World& world) {
  write_png(prefix + ".png", world.image);
  save_graph(prefix + ".graph", world.truth);
  std::ofstream out(prefix + ".spec");
  if (!out) throw FileError("cannot open '" + prefix + ".spec' for writing");
  write_world_spec(out, world.spec);
}

World load_world(const std::string& prefix) {
  World world;
  std::ifstream in(prefix + ".spec");
  if (!in) throw FileError("cannot open '" + prefix + ".spec'");
  world.spec = read_world_spec(in);
  world.truth = load_graph(prefix + ".graph");
  world.image = read_png(prefix + ".png");
  return world;
}

// --------------------------------------------------------------------- oracle

OracleContext::OracleContext(const RoadGraph& truth, double snap_radius, int angle_bins)
    : truth_(&truth),
      snap_radius_(snap_radius),
      angle_bins_(angle_bins),
      covered_(truth.edge_count(), false),
      incident_(truth.vertex_count()) {
  if (!(snap_radius > 0.0) || angle_bins < 1) throw ArgumentError("oracle needs a snap radius and bins");
  for (std::size_t e = 0; e < truth.edges().size(); ++e) {
    incident_[truth.edges()[e].first].push_back(e);
    incident_[truth.edges()[e].second].push_back(e);
  }
}

std::size_t OracleContext::covered_count() const {
  return static_cast<std::size_t>(std::count(covered_.begin(), covered_.end(), true));
}

DecisionLabel OracleContext::decide(const Point& position) {
  const SnapResult nearest = snap(*truth_, position, snap_radius_);
  if (!nearest.vertex) return {Action::Stop, -1};
  const VertexId here = *nearest.vertex;

  std::optional<std::size_t> chosen;
  int chosen_bin = angle_bins_;
  for (std::size_t e : incident_[here]) {
    if (covered_[e]) continue;
    const auto& [a, b] = truth_->edges()[e];
    const Point& far = truth_->vertex(a == here ? b : a);
    const int bin = angle_to_bin(heading_of(position, far), angle_bins_);
    if (bin < chosen_bin) {
      chosen_bin = bin;
      chosen = e;
    }
  }
  if (!chosen) return {Action::Stop, -1};
  covered_[*chosen] = true;
  return {Action::Walk, chosen_bin};
}

DecisionLabel oracle_decision(OracleContext& context, const RoadGraph&, const Point& position) {
  return context.decide(position);
}

DecisionOutput label_to_output(const DecisionLabel& label, int angle_bins) {
  DecisionOutput out;
  if (label.action == Action::Walk) {
    out.walk = 1.0;
    out.stop = 0.0;
    out.angle = Vector::Constant(angle_bins, 0.1);
    out.angle[label.angle_bin] = 0.9;
  } else {
    out.walk = 0.0;
    out.stop = 1.0;
    out.angle = Vector::Constant(angle_bins, 0.5);
  }
  return out;
}

DecisionFn oracle_decision_fn(OracleContext& context) {
  return [&context](const RoadGraph& graph, const Point& position, const Image&) {
    return label_to_output(oracle_decision(context, graph, position), context.angle_bins());
  };
}

SearchConfig world_search_config(const Image& image, double step, double threshold) {
  SearchConfig config;
  config.bbox = image.bounds();
  config.step = step;
  config.threshold = threshold;
  return config;
}

// -------------------------------------------------------------- training set

DecisionDataset make_training_set(const std::vector<WorldSpec>& specs, const TrainingSetConfig& config,
                                  TrainingSetStats* stats, std::vector<DatasetRecord>* records) {
  if (specs.empty()) throw ArgumentError("make_training_set needs at least one world");
  config.decision.validate();
  if (!(config.max_walk_per_stop > 0.0)) throw ConfigError("walk:stop ratio must be positive");

  DecisionDataset dataset(config.decision.window, config.decision.angle_bins);
  TrainingSetStats totals;
  for (std::size_t w = 0; w < specs.size(); ++w) {
    const World world = generate_world(specs[w]);
    SearchConfig search_config = world_search_config(world.image, config.step, 0.5);
    OracleContext oracle(world.truth, search_config.snap_radius_or_default(), config.decision.angle_bins);

    std::vector<DecisionInput> inputs;
    std::vector<DecisionLabel> labels;
    std::vector<Point> centers;
    const DecisionFn record = [&](const RoadGraph& graph, const Point& position, const Image& image) {
      inputs.push_back(encode_input(image, graph, position, config.decision));
      centers.push_back(position);
      labels.push_back(oracle.decide(position));
      return label_to_output(labels.back(), config.decision.angle_bins);
    };
    search_multi(world.image, component_seeds(world.truth), search_config, record);

    std::vector<std::size_t> walks;
    std::vector<std::size_t> stops;
    for (std::size_t n = 0; n < labels.size(); ++n) {
      (labels[n].action == Action::Walk ? walks : stops).push_back(n);
    }
    Rng rng(mix_seed(config.seed, w));
    auto keep_random = [&rng](std::vector<std::size_t>& items, std::size_t count) {
      for (std::size_t i = 0; i < items.size() && i < count; ++i) {
        std::swap(items[i], items[i + rng.below(items.size() - i)]);
      }
      if (items.size() > count) items.resize(count);
    };
    const auto walk_cap = static_cast<std::size_t>(config.max_walk_per_stop * static_cast<double>(stops.size()));
    keep_random(walks, walk_cap);

    std::vector<std::size_t> kept(walks);
    kept.insert(kept.end(), stops.begin(), stops.end());
    if (config.samples_per_world > 0) keep_random(kept, config.samples_per_world);
    std::sort(kept.begin(), kept.end());

    for (std::size_t n : kept) {
      dataset.add(inputs[n], labels[n]);
      if (records) records->push_back({specs[w].seed, n, centers[n], labels[n]});
      ++(labels[n].action == Action::Walk ? totals.walks : totals.stops);
    }
    totals.recorded += labels.size();
    ++totals.worlds;
  }
  if (stats) *stats = totals;
  return dataset;
}

void write_dataset_records(std::ostream& out, const std::vector<DatasetRecord>& records) {
  out << "DATASET 1\n";
  for (const auto& r : records) {
    out << r.world << ' ' << r.step << ' ' << format_coordinate(r.center.x) << ' ' << format_coordinate(r.center.y)
        << ' ' << to_string(r.label.action) << ' ';
    if (r.label.action == Action::Walk) {
      out << r.label.angle_bin;
    } else {
      out << '-';
    }
    out << '\n';
  }
}

namespace {

template <typename T>
T parse_record_field(const std::string& token, int line) {
  T value{};
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
    throw ParseError("invalid number '" + token + "'", line);
  }
  return value;
}

}  // namespace

std::vector<DatasetRecord> read_dataset_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "DATASET 1") throw ParseError("expected header 'DATASET 1'", 1);
  std::vector<DatasetRecord> records;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string token; fields >> token;) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() != 6) throw ParseError("dataset record needs 6 fields", line_number);
    DatasetRecord r;
    r.world = parse_record_field<std::uint64_t>(tokens[0], line_number);
    r.step = parse_record_field<std::size_t>(tokens[1], line_number);
    r.center = {parse_record_field<double>(tokens[2], line_number), parse_record_field<double>(tokens[3], line_number)};
    if (tokens[4] == "walk") {
      r.label = {Action::Walk, parse_record_field<int>(tokens[5], line_number)};
      if (r.label.angle_bin < 0) throw ParseError("negative angle bin", line_number);
    } else if (tokens[4] == "stop") {
      if (tokens[5] != "-") throw ParseError("stop records carry no angle bin", line_number);
      r.label = {Action::Stop, -1};
    } else {
      throw ParseError("action must be walk or stop", line_number);
    }
    records.push_back(r);
  }
  return records;
}

}  // namespace roaddbn
