#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "roaddbn/decision.hpp"
#include "roaddbn/graph.hpp"
#include "roaddbn/raster.hpp"
#include "roaddbn/search.hpp"

namespace roaddbn {

struct Palette {
  Color background{92, 118, 70};
  Color road{206, 204, 198};
  Color tree{38, 74, 34};
  Color water{58, 92, 148};
  Color shadow{52, 54, 60};
};

/// Parameters of one procedurally generated map.
struct WorldSpec {
  int size = 512;
  std::uint64_t seed = 1;
  double density = 0.5;      ///< [0,1], scales the number of road seeds
  double branching = 0.06;   ///< per-step branch probability
  double curvature = 0.12;   ///< max heading change per step, radians
  double road_width = 5.0;   ///< pixels
  double noise = 0.5;        ///< [0,1], clutter amount
  double step = 16.0;        ///< ground-truth vertex spacing, matches D
  Palette palette;

  void validate() const;
};

struct World {
  WorldSpec spec;
  RoadGraph truth;
  Image image;
};

World generate_world(const WorldSpec& spec);

/// First vertex of every connected component with at least one edge.
std::vector<Point> component_seeds(const RoadGraph& truth);

void write_world_spec(std::ostream& out, const WorldSpec& spec);
WorldSpec read_world_spec(std::istream& in);

/// Writes `<prefix>.png`, `<prefix>.graph` and `<prefix>.spec`.
void save_world(const std::string& prefix, const World& world);
World load_world(const std::string& prefix);

/// Ground truth plus per-edge coverage flags for the label oracle.
class OracleContext {
 public:
  OracleContext(const RoadGraph& truth, double snap_radius, int angle_bins);

  const RoadGraph& truth() const { return *truth_; }
  int angle_bins() const { return angle_bins_; }
  bool covered(std::size_t edge) const { return covered_[edge]; }
  std::size_t covered_count() const;

  /// Walk toward the far end of the uncovered truth edge (lowest angle bin)
  /// leaving the truth vertex nearest to `position` within the snap radius,
  /// marking that edge covered; otherwise stop.
  DecisionLabel decide(const Point& position);

 private:
  const RoadGraph* truth_;
  double snap_radius_;
  int angle_bins_;
  std::vector<bool> covered_;
  std::vector<std::vector<std::size_t>> incident_;
};

DecisionLabel oracle_decision(OracleContext& context, const RoadGraph& graph_so_far, const Point& position);

/// Confident output that reproduces `label` under any T in (0, 1).
DecisionOutput label_to_output(const DecisionLabel& label, int angle_bins);

/// Decision function backed by the oracle. `context` must outlive it.
DecisionFn oracle_decision_fn(OracleContext& context);

struct TrainingSetConfig {
  DecisionConfig decision;
  double step = 16.0;                   ///< D
  std::size_t samples_per_world = 0;    ///< 0 keeps every balanced sample
  double max_walk_per_stop = 3.0;
  std::uint64_t seed = 1;
};

struct TrainingSetStats {
  std::size_t worlds = 0;
  std::size_t recorded = 0;
  std::size_t walks = 0;
  std::size_t stops = 0;
};

/// Reference to one kept sample: the world seed and the index of the search
/// step that produced it, so the window can be regenerated by replay.
struct DatasetRecord {
  std::uint64_t world = 0;
  std::size_t step = 0;
  Point center;
  DecisionLabel label;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Oracle-driven search over each world, recording (input, label) at every
/// decision, then rebalancing so walks never exceed max_walk_per_stop * stops
/// within a world. `records`, when given, receives one entry per sample in
/// dataset order.
DecisionDataset make_training_set(const std::vector<WorldSpec>& specs, const TrainingSetConfig& config,
                                  TrainingSetStats* stats = nullptr, std::vector<DatasetRecord>* records = nullptr);

/// `DATASET 1`, then `<world> <step> <x> <y> <walk|stop> <bin|->` per record.
void write_dataset_records(std::ostream& out, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset_records(std::istream& in);

/// Search configuration covering the whole image.
SearchConfig world_search_config(const Image& image, double step, double threshold);

}  // namespace roaddbn
