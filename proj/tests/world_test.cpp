#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "roaddbn/errors.hpp"
#include "roaddbn/evaluation.hpp"
#include "roaddbn/world.hpp"

using namespace roaddbn;

namespace {

RoadGraph east_west_road() {
  RoadGraph truth;
  const auto a = truth.add_vertex({0, 0});
  const auto b = truth.add_vertex({16, 0});
  const auto c = truth.add_vertex({32, 0});
  truth.add_edge(a, b);
  truth.add_edge(b, c);
  return truth;
}

}  // namespace

TEST_CASE("world generation is deterministic") {
  WorldSpec spec;
  spec.size = 256;
  spec.seed = 17;
  const World a = generate_world(spec);
  const World b = generate_world(spec);
  CHECK(a.image == b.image);
  CHECK(a.truth == b.truth);
  spec.seed = 18;
  CHECK_FALSE(generate_world(spec).image == a.image);
}

TEST_CASE("empty worlds contain clutter but no road color") {
  WorldSpec spec;
  spec.size = 128;
  spec.density = 0.0;
  spec.noise = 1.0;
  const World world = generate_world(spec);
  CHECK(world.truth.empty());
  bool varied = false;
  for (int row = 0; row < 128; ++row) {
    for (int col = 0; col < 128; ++col) {
      const Color c = world.image.pixel(col, row);
      CHECK_FALSE(c == spec.palette.road);
      if (!(c == world.image.pixel(0, 0))) varied = true;
    }
  }
  CHECK(varied);
}

TEST_CASE("ground-truth vertices sit on road pixels") {
  for (std::uint64_t seed : {1, 2, 3}) {
    WorldSpec spec;
    spec.seed = seed;
    const World world = generate_world(spec);
    REQUIRE(world.truth.vertex_count() > 10);
    for (const Point& p : world.truth.vertices()) {
      int col = 0;
      int row = 0;
      REQUIRE(world.image.locate(p, col, row));
      CHECK(world.image.pixel(col, row) == spec.palette.road);
      CHECK(world.image.bounds().contains(p));
    }
    for (const auto& [a, b] : world.truth.edges()) CHECK(distance(world.truth.vertex(a), world.truth.vertex(b)) > 0.0);
    for (const auto& component : world.truth.components()) CHECK(!component.empty());
  }
}

TEST_CASE("world spec validation") {
  WorldSpec spec;
  spec.size = 32;
  CHECK_THROWS_AS(generate_world(spec), ConfigError);
  spec = WorldSpec{};
  spec.density = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = WorldSpec{};
  spec.road_width = 0.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("world spec text round trip") {
  WorldSpec spec;
  spec.seed = 99;
  spec.curvature = 0.2;
  spec.palette.road = {1, 2, 3};
  std::stringstream text;
  write_world_spec(text, spec);
  const WorldSpec back = read_world_spec(text);
  CHECK(back.seed == 99);
  CHECK(back.curvature == 0.2);
  CHECK(back.palette.road == Color{1, 2, 3});
  std::stringstream bad("size = 512\nsped = 3\n");
  try {
    read_world_spec(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& error) {
    CHECK(error.line() == 2);
  }
}

TEST_CASE("world triples on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "roaddbn_world_test";
  std::filesystem::create_directories(dir);
  WorldSpec spec;
  spec.size = 128;
  spec.seed = 5;
  const World world = generate_world(spec);
  const std::string prefix = (dir / "w5").string();
  save_world(prefix, world);
  CHECK(std::filesystem::exists(prefix + ".png"));
  CHECK(std::filesystem::exists(prefix + ".graph"));
  CHECK(std::filesystem::exists(prefix + ".spec"));
  const World back = load_world(prefix);
  CHECK(back.image == world.image);
  CHECK(back.truth == world.truth);
  CHECK(back.spec.seed == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("oracle labels on a straight road") {
  const RoadGraph truth = east_west_road();
  OracleContext context(truth, 8.0, 64);
  CHECK(context.decide({16, 40}) == DecisionLabel{Action::Stop, -1});
  CHECK(context.decide({16, -1}) == DecisionLabel{Action::Walk, 0});
  CHECK(context.covered(1));
  CHECK(context.decide({16, 0}) == DecisionLabel{Action::Walk, 32});
  CHECK(context.covered_count() == 2);
  CHECK(context.decide({16, 0}) == DecisionLabel{Action::Stop, -1});
}

TEST_CASE("label_to_output reproduces labels at any threshold") {
  for (double t : {0.01, 0.3, 0.99}) {
    const auto walk = select_action(label_to_output({Action::Walk, 9}, 16), t);
    CHECK(walk.action == Action::Walk);
    CHECK(*walk.alpha == doctest::Approx(bin_center(9, 16)));
    CHECK(select_action(label_to_output({Action::Stop, -1}, 16), t).action == Action::Stop);
  }
}

TEST_CASE("oracle-driven search recovers the ground truth") {
  for (std::uint64_t seed : {21, 22, 23}) {
    WorldSpec spec;
    spec.seed = seed;
    const World world = generate_world(spec);
    OracleContext context(world.truth, spec.step / 2, 64);
    const auto config = world_search_config(world.image, spec.step, 0.5);
    const auto result = search_multi(world.image, component_seeds(world.truth), config, oracle_decision_fn(context));
    const auto match = match_vertices(result.graph, world.truth, spec.step / 2, spec.step);
    CHECK(precision(match) >= 0.95);
    CHECK(recall(match) >= 0.95);
    CHECK(result.halt == SearchHalt::StackEmpty);
  }
}

TEST_CASE("training sets are balanced and reproducible") {
  std::vector<WorldSpec> specs(2);
  specs[0].seed = 3;
  specs[1].seed = 4;
  specs[0].size = specs[1].size = 256;
  TrainingSetConfig config;
  config.decision.window = 16;
  TrainingSetStats stats;
  const auto data = make_training_set(specs, config, &stats);
  CHECK(data.size() > 0);
  CHECK(stats.worlds == 2);
  CHECK(stats.walks + stats.stops == static_cast<std::size_t>(data.size()));
  CHECK(static_cast<double>(data.walk_count()) <= 3.0 * static_cast<double>(data.stop_count()));
  CHECK(stats.recorded >= static_cast<std::size_t>(data.size()));
  CHECK(make_training_set(specs, config).hash() == data.hash());

  config.samples_per_world = 10;
  CHECK(make_training_set(specs, config).size() <= 20);
  CHECK_THROWS_AS(make_training_set({}, config), ArgumentError);
}

TEST_CASE("dataset records reference replayable search steps") {
  std::vector<WorldSpec> specs(1);
  specs[0].seed = 6;
  specs[0].size = 256;
  TrainingSetConfig config;
  config.decision.window = 16;
  std::vector<DatasetRecord> records;
  const auto data = make_training_set(specs, config, nullptr, &records);
  REQUIRE(records.size() == static_cast<std::size_t>(data.size()));
  for (std::size_t n = 0; n < records.size(); ++n) CHECK(records[n].label == data.labels()[n]);

  const World world = generate_world(specs[0]);
  OracleContext context(world.truth, 8.0, 64);
  const auto replay = search_multi(world.image, component_seeds(world.truth),
                                   world_search_config(world.image, 16.0, 0.5), oracle_decision_fn(context));
  for (const auto& r : records) {
    REQUIRE(r.step < replay.trace.size());
    CHECK(replay.trace[r.step].position == r.center);
    CHECK(r.world == 6);
  }

  std::stringstream text;
  write_dataset_records(text, records);
  CHECK(read_dataset_records(text) == records);
  std::stringstream bad("DATASET 1\n6 0 1 2 walk -\n");
  try {
    read_dataset_records(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& error) {
    CHECK(error.line() == 2);
  }
}
