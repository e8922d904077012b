// roadtracer: command-line front end for world generation, adaptive DBN
// training, graph search and evaluation.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roaddbn/dbn.hpp"
#include "roaddbn/decision.hpp"
#include "roaddbn/errors.hpp"
#include "roaddbn/evaluation.hpp"
#include "roaddbn/search.hpp"
#include "roaddbn/world.hpp"

namespace fs = std::filesystem;
using namespace roaddbn;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw FileError("cannot open '" + path + "'");
}

void require_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw FileError("output directory '" + parent.string() + "' does not exist");
  }
}

Color parse_color(const std::string& text) {
  int r = 0;
  int g = 0;
  int b = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d%c", &r, &g, &b, &tail) != 3 || r < 0 || g < 0 || b < 0 || r > 255 ||
      g > 255 || b > 255) {
    throw ConfigError("color '" + text + "' is not r,g,b with components in 0..255");
  }
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

std::vector<std::string> world_prefixes(const std::string& dir) {
  if (!fs::is_directory(dir)) throw FileError("world directory '" + dir + "' does not exist");
  std::vector<std::string> prefixes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".spec") prefixes.push_back((entry.path().parent_path() / entry.path().stem()).string());
  }
  std::sort(prefixes.begin(), prefixes.end());
  if (prefixes.empty()) throw FileError("no world triples in '" + dir + "'");
  return prefixes;
}

std::vector<WorldSpec> world_specs(const std::string& dir) {
  std::vector<WorldSpec> specs;
  for (const auto& prefix : world_prefixes(dir)) {
    std::ifstream in(prefix + ".spec");
    if (!in) throw FileError("cannot open '" + prefix + ".spec'");
    specs.push_back(read_world_spec(in));
  }
  return specs;
}

// ------------------------------------------------------------------ options

struct GenerateOptions {
  std::string out_dir;
  int count = 1;
  std::uint64_t seed = 1;
  WorldSpec spec;
};

struct DataOptions {
  std::string worlds;
  int window = 64;
  int angle_bins = 64;
  double stroke = 3.0;
  double max_walk_per_stop = 3.0;
  std::size_t samples_per_world = 0;
  std::string records_out;

  TrainingSetConfig training_config(double step, std::uint64_t seed) const {
    TrainingSetConfig config;
    config.decision.window = window;
    config.decision.angle_bins = angle_bins;
    config.decision.graph_stroke = stroke;
    config.step = step;
    config.max_walk_per_stop = max_walk_per_stop;
    config.samples_per_world = samples_per_world;
    config.seed = seed;
    return config;
  }
};

struct PretrainOptions {
  DataOptions data;
  std::string out;
  std::string log;
  double step = 16.0;
  StructureThresholds thresholds;
  double layer_wd = 0.0;
  PretrainSchedule schedule;
};

struct TrainOptions {
  DataOptions data;
  std::string model;
  std::string out;
  bool resume = false;
  double step = 16.0;
  HeadSchedule schedule;
  std::string optimizer = "adam";
};

struct InferOptions {
  std::string model;
  std::string image;
  std::string world;
  std::string seeds_graph;
  std::vector<std::string> seed_points;
  std::string out_graph;
  std::string out_trace;
  double threshold = 0.3;
  double step = 16.0;
  double snap_radius = 0.0;
  bool no_snap = false;
  std::size_t step_budget = 100000;
  int window = 64;
  double stroke = 3.0;
};

struct EvalOptions {
  std::string truth;
  std::vector<std::string> runs;
  std::vector<std::string> times;
  double radius = 8.0;
  double spacing = 16.0;
  std::string format = "table";
};

struct RenderOptions {
  std::string image;
  std::string graph;
  std::string truth;
  std::string out;
  std::string color = "255,255,0";
  double width = 2.0;
  bool side_by_side = false;
};

// ------------------------------------------------------------------ commands

int run_generate(const GenerateOptions& o) {
  if (o.count < 1) throw ConfigError("--count must be at least 1");
  o.spec.validate();
  fs::create_directories(o.out_dir);
  for (int k = 0; k < o.count; ++k) {
    WorldSpec spec = o.spec;
    spec.seed = o.seed + static_cast<std::uint64_t>(k);
    const World world = generate_world(spec);
    const std::string prefix = (fs::path(o.out_dir) / ("world_" + std::to_string(spec.seed))).string();
    save_world(prefix, world);
    std::cout << spec.seed << ' ' << prefix << ' ' << world.truth.vertex_count() << ' ' << world.truth.edge_count()
              << '\n';
  }
  return 0;
}

DecisionDataset build_dataset(const DataOptions& data, double step, std::uint64_t seed) {
  const auto specs = world_specs(data.worlds);
  TrainingSetStats stats;
  std::vector<DatasetRecord> records;
  auto dataset = make_training_set(specs, data.training_config(step, seed), &stats, &records);
  if (!data.records_out.empty()) {
    std::ofstream out(data.records_out);
    write_dataset_records(out, records);
    if (!out) throw FileError("write to '" + data.records_out + "' failed");
  }
  std::cerr << "dataset: " << dataset.size() << " samples from " << stats.worlds << " worlds (" << stats.walks
            << " walk, " << stats.stops << " stop, " << stats.recorded << " recorded)\n";
  return dataset;
}

int run_pretrain(PretrainOptions o) {
  if (o.layer_wd > 0.0) o.thresholds.layer_wd = o.layer_wd;
  o.thresholds.validate();
  o.schedule.validate();
  o.data.training_config(o.step, o.schedule.seed).decision.validate();
  require_parent(o.out);
  if (!o.log.empty()) require_parent(o.log);
  if (!o.data.records_out.empty()) require_parent(o.data.records_out);

  const auto start = Clock::now();
  const auto dataset = build_dataset(o.data, o.step, o.schedule.seed);
  const DbnStack stack = pretrain_adaptive(dataset, o.thresholds, o.schedule, [](const EpochReport& r) {
    std::cerr << "epoch " << r.epoch << " layer " << r.layer << " J=" << r.hidden << " recon " << r.reconstruction
              << " wd " << r.wd_total << '\n';
  });
  for (const auto& event : stack.log) std::cerr << event.to_line() << '\n';
  save_stack(o.out, stack);
  if (!o.log.empty()) {
    std::ofstream log(o.log);
    write_structure_log(log, stack.log);
    if (!log) throw FileError("write to '" + o.log + "' failed");
  }
  std::cout << "layers: " << describe_shape(stack.shape()) << '\n';
  std::printf("time: %.1f minutes\n", seconds_since(start) / 60.0);
  return 0;
}

int run_train(TrainOptions o) {
  if (o.optimizer == "adam") {
    o.schedule.optimizer = Optimizer::Adam;
  } else if (o.optimizer == "sgd") {
    o.schedule.optimizer = Optimizer::Sgd;
  } else {
    throw ConfigError("--optimizer must be 'adam' or 'sgd'");
  }
  o.schedule.validate();
  o.data.training_config(o.step, o.schedule.seed).decision.validate();
  const bool resuming = o.resume && fs::is_regular_file(o.out);
  const std::string source = resuming ? o.out : o.model;
  require_file(source);
  require_parent(o.out);
  if (!o.data.records_out.empty()) require_parent(o.data.records_out);

  DbnStack stack = load_stack(source);
  if (stack.input_dim() != 4 * static_cast<Index>(o.data.window) * o.data.window) {
    throw StructuralError("model input width does not match --window");
  }
  const auto start = Clock::now();
  const int target = o.schedule.epochs;
  const int done = resuming ? stack.head_epochs : 0;
  if (!resuming && stack.head_epochs > 0) std::cerr << "continuing from " << stack.head_epochs << " epochs\n";
  const int base = stack.head_epochs - done;

  const auto dataset = build_dataset(o.data, o.step, o.schedule.seed);
  HeadSchedule one = o.schedule;
  one.epochs = 1;
  while (stack.head_epochs - base < target) {
    stack = train_head(stack, dataset, one, [](const HeadEpochReport& r) {
      std::cerr << "head epoch " << r.epoch << " loss " << r.loss << '\n';
    });
    save_stack(o.out, stack);
  }
  const ActionAccuracy accuracy = evaluate_decisions(stack, dataset);
  std::cout << "layers: " << describe_shape(stack.shape()) << '\n';
  std::printf("training action accuracy: %.4f\n", accuracy.action);
  std::printf("training angle accuracy: %.4f (within one bin %.4f)\n", accuracy.angle, accuracy.angle_within_one);
  std::printf("time: %.1f minutes\n", seconds_since(start) / 60.0);
  return 0;
}

Point parse_point(const std::string& text) {
  double x = 0.0;
  double y = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf%c", &x, &y, &tail) != 2) {
    throw ConfigError("seed point '" + text + "' is not x,y");
  }
  return {x, y};
}

int run_infer(const InferOptions& o) {
  if (!(o.threshold > 0.0 && o.threshold < 1.0)) throw ConfigError("--threshold must lie in (0, 1)");
  if (!(o.step > 0.0)) throw ConfigError("--step must be positive");
  if (o.snap_radius < 0.0) throw ConfigError("--snap-radius must be positive");
  DecisionConfig decision;
  decision.window = o.window;
  decision.graph_stroke = o.stroke;
  decision.validate();
  std::vector<Point> seeds;
  for (const auto& text : o.seed_points) seeds.push_back(parse_point(text));
  if (o.image.empty() == o.world.empty()) throw ConfigError("give exactly one of --image and --world");
  const std::string image_path = o.world.empty() ? o.image : o.world + ".png";
  require_file(o.model);
  require_file(image_path);
  if (!o.seeds_graph.empty()) require_file(o.seeds_graph);
  if (!o.world.empty()) require_file(o.world + ".graph");
  require_parent(o.out_graph);
  if (!o.out_trace.empty()) require_parent(o.out_trace);

  const DbnStack stack = load_stack(o.model);
  if (stack.head.empty()) throw StructuralError("model has no trained head");
  decision.angle_bins = stack.head.angle_bins;
  if (stack.input_dim() != 4 * static_cast<Index>(o.window) * o.window) {
    throw StructuralError("model input width does not match --window");
  }
  const Image image = read_png(image_path);
  if (!o.seeds_graph.empty()) {
    for (const auto& p : component_seeds(load_graph(o.seeds_graph))) seeds.push_back(p);
  }
  if (!o.world.empty()) {
    for (const auto& p : component_seeds(load_graph(o.world + ".graph"))) seeds.push_back(p);
  }
  if (seeds.empty()) throw ConfigError("no seed points: use --seed, --seeds-from or --world");

  SearchConfig config = world_search_config(image, o.step, o.threshold);
  if (o.snap_radius > 0.0) config.snap_radius = o.snap_radius;
  config.snapping = !o.no_snap;
  config.step_budget = o.step_budget;
  config.validate();

  const DecisionFn decide = [&](const RoadGraph& graph, const Point& position, const Image& img) {
    return infer_decision(stack, encode_input(img, graph, position, decision));
  };
  const auto start = Clock::now();
  const SearchResult result = search_multi(image, seeds, config, decide);
  const double seconds = seconds_since(start);

  save_graph(o.out_graph, result.graph);
  if (!o.out_trace.empty()) {
    std::ofstream trace(o.out_trace);
    write_trace(trace, result.trace);
    if (!trace) throw FileError("write to '" + o.out_trace + "' failed");
  }
  std::cout << "vertices: " << result.graph.vertex_count() << "\nedges: " << result.graph.edge_count()
            << "\nsteps: " << result.trace.size() << "\nhalt: "
            << (result.halt == SearchHalt::StackEmpty ? "stack-empty" : "step-budget") << '\n';
  std::printf("time: %.1f minutes (%.3f s)\n", seconds / 60.0, seconds);
  return 0;
}

std::pair<std::string, std::string> split_label(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError(std::string(flag) + " expects LABEL=VALUE, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

int run_eval(const EvalOptions& o) {
  if (!(o.radius > 0.0) || !(o.spacing > 0.0)) throw ConfigError("--radius and --spacing must be positive");
  if (o.format != "table" && o.format != "dsv") throw ConfigError("--format must be 'table' or 'dsv'");
  if (o.runs.empty()) throw ConfigError("at least one --run is required");
  std::map<std::string, double> seconds;
  for (const auto& t : o.times) {
    const auto [label, value] = split_label(t, "--time");
    try {
      seconds[label] = std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("--time value '" + value + "' is not a number");
    }
  }
  std::vector<std::pair<std::string, std::string>> runs;
  for (const auto& r : o.runs) runs.push_back(split_label(r, "--run"));
  require_file(o.truth);
  for (const auto& [label, path] : runs) require_file(path);

  const RoadGraph truth = load_graph(o.truth);
  std::vector<EvalRun> reports;
  for (const auto& [label, path] : runs) {
    reports.push_back({label, match_vertices(load_graph(path), truth, o.radius, o.spacing),
                       seconds.count(label) ? seconds[label] : 0.0});
  }
  std::cout << (o.format == "table" ? report_table(reports) : report_dsv(reports, ','));
  return 0;
}

int run_render(const RenderOptions& o) {
  if (!(o.width > 0.0)) throw ConfigError("--width must be positive");
  if (o.side_by_side && o.truth.empty()) throw ConfigError("--side-by-side needs --truth");
  const Color color = parse_color(o.color);
  require_file(o.image);
  require_file(o.graph);
  if (!o.truth.empty()) require_file(o.truth);
  require_parent(o.out);

  Image image = read_png(o.image);
  const RoadGraph graph = load_graph(o.graph);
  if (o.truth.empty()) {
    draw_graph(image, graph, o.width, color);
  } else if (o.side_by_side) {
    Image left = image;
    draw_graph(left, load_graph(o.truth), o.width, {0, 200, 0});
    draw_graph(image, graph, o.width, {220, 0, 0});
    Image both(2 * image.width(), image.height());
    for (int row = 0; row < image.height(); ++row) {
      for (int col = 0; col < image.width(); ++col) {
        both.set_pixel(col, row, left.pixel(col, row));
        both.set_pixel(image.width() + col, row, image.pixel(col, row));
      }
    }
    image = std::move(both);
  } else {
    draw_graph(image, load_graph(o.truth), o.width, {0, 200, 0});
    draw_graph(image, graph, o.width, {220, 0, 0});
  }
  write_png(o.out, image, "roadtracer overlay of " + fs::path(o.graph).filename().string());
  return 0;
}

void add_data_options(CLI::App* cmd, DataOptions& data) {
  cmd->add_option("--worlds", data.worlds, "Directory of world triples")->required();
  cmd->add_option("--window", data.window, "Window size d (16, 32, 64 or 128)")->capture_default_str();
  cmd->add_option("--angle-bins", data.angle_bins, "Angle bins a")->capture_default_str();
  cmd->add_option("--stroke", data.stroke, "Graph plane stroke width")->capture_default_str();
  cmd->add_option("--max-walk-per-stop", data.max_walk_per_stop, "Walk:stop cap per world")->capture_default_str();
  cmd->add_option("--samples-per-world", data.samples_per_world, "Per-world sample cap, 0 for none")
      ->capture_default_str();
  cmd->add_option("--dataset-out", data.records_out, "Write the sample record stream here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road graph extraction with an adaptive deep belief network"};
  app.set_config("--config", "", "Key = value configuration file; flags override it");
  app.require_subcommand(1);

  std::function<int()> action;

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write synthetic world triples (PNG, ROADGRAPH, spec)");
  generate->add_option("--out", gen.out_dir, "Output directory")->required();
  generate->add_option("--count", gen.count, "Number of worlds")->capture_default_str();
  generate->add_option("--seed", gen.seed, "First seed; world k uses seed + k")->capture_default_str();
  generate->add_option("--size", gen.spec.size, "Image size in pixels")->capture_default_str();
  generate->add_option("--density", gen.spec.density, "Road density in [0,1]")->capture_default_str();
  generate->add_option("--branching", gen.spec.branching, "Branch probability per step")->capture_default_str();
  generate->add_option("--curvature", gen.spec.curvature, "Max heading change per step")->capture_default_str();
  generate->add_option("--road-width", gen.spec.road_width, "Road width in pixels")->capture_default_str();
  generate->add_option("--noise", gen.spec.noise, "Clutter amount in [0,1]")->capture_default_str();
  generate->add_option("--step", gen.spec.step, "Vertex spacing D")->capture_default_str();
  generate->callback([&] { action = [&] { return run_generate(gen); }; });

  PretrainOptions pre;
  auto* pretrain = app.add_subcommand("pretrain", "Adaptive layer-wise pretraining on oracle-labelled worlds");
  add_data_options(pretrain, pre.data);
  pretrain->add_option("--out", pre.out, "Stack checkpoint to write")->required();
  pretrain->add_option("--log", pre.log, "Structure log to write");
  pretrain->add_option("--step", pre.step, "Step distance D")->capture_default_str();
  pretrain->add_option("--hidden", pre.schedule.initial_hidden, "Initial hidden units")->capture_default_str();
  pretrain->add_option("--new-layer-hidden", pre.schedule.new_layer_hidden, "Hidden units of generated layers")
      ->capture_default_str();
  pretrain->add_option("--epochs", pre.schedule.epochs_per_layer, "Epochs per layer")->capture_default_str();
  pretrain->add_option("--batch", pre.schedule.batch_size, "Minibatch size")->capture_default_str();
  pretrain->add_option("--lr", pre.schedule.cd.learning_rate, "CD learning rate")->capture_default_str();
  pretrain->add_option("--cd-k", pre.schedule.cd.k, "Gibbs steps per update")->capture_default_str();
  pretrain->add_option("--gamma", pre.schedule.gamma, "WD smoothing factor")->capture_default_str();
  pretrain->add_option("--seed", pre.schedule.seed, "Random seed")->capture_default_str();
  pretrain->add_option("--theta-g", pre.thresholds.generation, "Generation threshold")->capture_default_str();
  pretrain->add_option("--theta-a", pre.thresholds.annihilation, "Annihilation threshold")->capture_default_str();
  pretrain->add_option("--theta-l-wd", pre.layer_wd, "Layer WD threshold (default 0.1 J)");
  pretrain->add_option("--theta-l-energy", pre.thresholds.layer_energy, "Layer energy threshold")
      ->capture_default_str();
  pretrain->add_option("--max-hidden", pre.thresholds.max_hidden, "Neuron cap J_max")->capture_default_str();
  pretrain->add_option("--max-layers", pre.thresholds.max_layers, "Layer cap L_max")->capture_default_str();
  pretrain->callback([&] { action = [&] { return run_pretrain(pre); }; });

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Supervised training of the output head and fine-tuning");
  add_data_options(train, tr.data);
  train->add_option("--model", tr.model, "Pretrained stack checkpoint")->required();
  train->add_option("--out", tr.out, "Checkpoint to write after every epoch")->required();
  train->add_flag("--resume", tr.resume, "Continue from --out when it exists");
  train->add_option("--step", tr.step, "Step distance D")->capture_default_str();
  train->add_option("--epochs", tr.schedule.epochs, "Epochs to run (with --resume: total)")->capture_default_str();
  train->add_option("--batch", tr.schedule.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--lr", tr.schedule.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--optimizer", tr.optimizer, "adam or sgd")->capture_default_str();
  train->add_option("--angle-weight", tr.schedule.angle_weight, "Weight of the angle loss")->capture_default_str();
  train->add_option("--angle-spread", tr.schedule.angle_spread, "Gaussian angle target width in bins")
      ->capture_default_str();
  train->add_flag("!--no-fine-tune-lower", tr.schedule.fine_tune_lower, "Freeze the RBM layers");
  train->add_option("--seed", tr.schedule.seed, "Random seed")->capture_default_str();
  train->callback([&] { action = [&] { return run_train(tr); }; });

  InferOptions inf;
  auto* infer = app.add_subcommand("infer", "Trace a road graph from an image with a trained model");
  infer->add_option("--model", inf.model, "Trained stack checkpoint")->required();
  infer->add_option("--image", inf.image, "Input PNG");
  infer->add_option("--world", inf.world, "World prefix; uses its PNG and seeds from its graph");
  infer->add_option("--seed", inf.seed_points, "Start point x,y (repeatable)");
  infer->add_option("--seeds-from", inf.seeds_graph, "ROADGRAPH whose components provide start points");
  infer->add_option("--out-graph", inf.out_graph, "ROADGRAPH output")->required();
  infer->add_option("--out-trace", inf.out_trace, "Trace output");
  infer->add_option("--threshold,-T", inf.threshold, "Walk threshold T")->capture_default_str();
  infer->add_option("--step", inf.step, "Step distance D")->capture_default_str();
  infer->add_option("--snap-radius", inf.snap_radius, "Snap radius (default D/2)");
  infer->add_flag("--no-snap", inf.no_snap, "Disable vertex snapping");
  infer->add_option("--step-budget", inf.step_budget, "Maximum search iterations")->capture_default_str();
  infer->add_option("--window", inf.window, "Window size d")->capture_default_str();
  infer->add_option("--stroke", inf.stroke, "Graph plane stroke width")->capture_default_str();
  infer->callback([&] { action = [&] { return run_infer(inf); }; });

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Precision and recall against a ground-truth graph");
  eval->add_option("--truth", ev.truth, "Ground-truth ROADGRAPH")->required();
  eval->add_option("--run", ev.runs, "LABEL=PATH of a predicted ROADGRAPH (repeatable)");
  eval->add_option("--time", ev.times, "LABEL=SECONDS search time for the report");
  eval->add_option("--radius", ev.radius, "Match radius")->capture_default_str();
  eval->add_option("--spacing", ev.spacing, "Resampling spacing")->capture_default_str();
  eval->add_option("--format", ev.format, "table or dsv")->capture_default_str();
  eval->callback([&] { action = [&] { return run_eval(ev); }; });

  RenderOptions ren;
  auto* render = app.add_subcommand("render", "Draw a graph over an image");
  render->add_option("--image", ren.image, "Input PNG")->required();
  render->add_option("--graph", ren.graph, "ROADGRAPH to draw")->required();
  render->add_option("--truth", ren.truth, "Ground truth: draws truth green and the graph red");
  render->add_option("--out", ren.out, "Output PNG")->required();
  render->add_option("--color", ren.color, "Stroke color r,g,b")->capture_default_str();
  render->add_option("--width", ren.width, "Stroke width")->capture_default_str();
  render->add_flag("--side-by-side", ren.side_by_side, "Truth on the left, the graph on the right");
  render->callback([&] { action = [&] { return run_render(ren); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const ConfigError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitData;
  }
}
