#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ariadne/frontier.hpp"
#include "ariadne/gridmap.hpp"
#include "ariadne/roadmap.hpp"

namespace ariadne {

struct RewardParams {
  double frontier_scale = 1.0 / 50.0;  // a
  double length_scale = 1.0 / 64.0;    // b
  double finish_bonus = 20.0;          // r_f
  double completion_threshold = 0.99;
};

// r_o semantics: `kObserved` counts frontier cells of the pre-move map that
// stopped being frontiers as a result of the move; `kObservableAtArrival` is
// the observable-frontier count at the new viewpoint on the post-move map.
enum class FrontierRewardMode { kObserved, kObservableAtArrival };

// a*r_o - b*len + (r_f iff completed). The cost sign lives here: the length
// enters as a punishment.
double total_reward(double r_o, double r_c_len, bool done_complete,
                    const RewardParams& params);

struct EnvConfig {
  MapGenConfig map;
  SensorConfig sensor;
  RewardParams reward;
  FrontierRewardMode frontier_mode = FrontierRewardMode::kObserved;
  int lattice_count = 900;
  int k_neighbors = 20;
  int step_budget = 128;
};

using Observation = AugmentedGraph;

struct Transition {
  Observation obs;
  int action = 0;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;  // terminal completion (timeouts are not terminal)
};

struct StepInfo {
  double r_o = 0.0;
  double r_c = 0.0;  // -length of the executed segment
  double r_f = 0.0;
  double rate = 0.0;
  double length_so_far = 0.0;
  int64_t newly_classified = 0;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool completed = false;  // rate crossed the completion threshold
  StepInfo info;
};

struct ReplayRow {
  int step = 0;
  int node_id = 0;  // lattice id of the chosen node (-1 for the reset row)
  double r_o = 0.0, r_c = 0.0, r_f = 0.0, reward = 0.0;
  double rate = 0.0;
  double length = 0.0;
};

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One exploration episode over a ground-truth map. Strictly sequential;
// independent instances run in parallel.
class ExploreEnv {
 public:
  explicit ExploreEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {}

  // Generates a map from cfg.map (seed replaced by `seed`) and starts an
  // episode from a uniformly random free cell.
  Observation reset(uint64_t seed);
  // Starts an episode on an existing map. Uses map.start unless `start` is
  // given. Throws EnvError if no active node is visible from the start.
  Observation reset_on(const GroundTruthMap& truth, std::optional<Cell> start,
                       uint64_t seed);

  StepResult step(int action);

  bool done() const { return done_; }
  bool completed() const { return completed_; }
  int steps() const { return steps_; }
  double rate() const { return rate_; }
  double length() const { return length_; }
  int current_slot() const { return current_slot_; }
  int current_lattice_id() const { return graph_.active[current_slot_]; }
  const EnvConfig& config() const { return cfg_; }
  const GroundTruthMap& truth() const { return truth_; }
  const PartialMap& partial() const { return partial_; }
  const NodeLattice& lattice() const { return lattice_; }
  const CollisionFreeGraph& graph() const { return graph_; }
  const FrontierSet& frontiers() const { return frontiers_; }
  const std::vector<int>& utilities() const { return utilities_; }
  const std::vector<uint8_t>& visited() const { return visited_; }
  const std::vector<ReplayRow>& replay() const { return replay_; }
  Observation observation() const;

 private:
  void sense_initial(Point start_pose);
  void refresh_graph_keep_current(int current_lattice_id);

  EnvConfig cfg_;
  GroundTruthMap truth_;
  PartialMap partial_;
  NodeLattice lattice_;
  CollisionFreeGraph graph_;
  FrontierSet frontiers_;
  std::vector<int> utilities_;      // per lattice id
  std::vector<uint8_t> visited_;    // per lattice id
  std::vector<ReplayRow> replay_;
  int current_slot_ = -1;
  int steps_ = 0;
  double rate_ = 0.0;
  double length_ = 0.0;
  bool done_ = false;
  bool completed_ = false;
  bool finish_bonus_paid_ = false;
};

// Replay log CSV ("ARIADNE-REPLAY v1"): header comment with the environment
// parameters, then one row per decision.
std::string replay_to_csv(const ExploreEnv& env);
void save_replay(const ExploreEnv& env, const std::string& path);

}  // namespace ariadne
