#include "ariadne/explore_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ariadne/rng.hpp"

namespace ariadne {

double total_reward(double r_o, double r_c_len, bool done_complete,
                    const RewardParams& params) {
  return params.frontier_scale * r_o - params.length_scale * r_c_len +
         (done_complete ? params.finish_bonus : 0.0);
}

Observation ExploreEnv::reset(uint64_t seed) {
  for (int map_try = 0; map_try < 5; ++map_try) {
    MapGenConfig map_cfg = cfg_.map;
    map_cfg.seed = derive_seed(seed, "env-map", static_cast<uint64_t>(map_try));
    GroundTruthMap truth = generate_dungeon(map_cfg);

    Rng rng(derive_seed(seed, "env-start", static_cast<uint64_t>(map_try)));
    std::vector<Cell> free_cells;
    for (int r = 0; r < truth.height; ++r) {
      for (int c = 0; c < truth.width; ++c) {
        if (truth.at({c, r}) == TruthCell::kFree) free_cells.push_back({c, r});
      }
    }
    for (int start_try = 0; start_try < 10; ++start_try) {
      Cell start = free_cells[rng.next_below(free_cells.size())];
      try {
        return reset_on(truth, start, seed);
      } catch (const EnvError&) {
        // isolated start; resample
      }
    }
  }
  throw EnvError("reset: no viable start pose after bounded retries");
}

Observation ExploreEnv::reset_on(const GroundTruthMap& truth, std::optional<Cell> start,
                                 uint64_t seed) {
  (void)seed;
  truth_ = truth;
  if (start) {
    if (!truth_.in_bounds(*start) || truth_.at(*start) != TruthCell::kFree)
      throw EnvError("reset_on: start cell is not free");
    truth_.start = *start;
    truth_.finalize_closure();
  }
  lattice_ = build_lattice(truth_.width, truth_.height, cfg_.lattice_count);
  partial_ = PartialMap(truth_.width, truth_.height);
  steps_ = 0;
  length_ = 0.0;
  done_ = false;
  completed_ = false;
  finish_bonus_paid_ = false;
  visited_.assign(lattice_.points.size(), 0);
  replay_.clear();
  sense_initial(cell_center(truth_.start));
  return observation();
}

void ExploreEnv::sense_initial(Point start_pose) {
  sense_and_update(partial_, truth_, start_pose, cfg_.sensor);
  graph_ = rebuild_graph(partial_, lattice_, cfg_.k_neighbors);

  // Snap to the nearest active node visible from the start pose.
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int slot = 0; slot < graph_.count(); ++slot) {
    const double d = distance_sq(graph_.pos[slot], start_pose);
    if (d < best_d && line_of_sight(partial_, start_pose, graph_.pos[slot])) {
      best_d = d;
      best = slot;
    }
  }
  if (best < 0) throw EnvError("reset: start pose isolated (no visible active node)");
  sense_and_update(partial_, truth_, graph_.pos[best], cfg_.sensor);

  const int current_id = graph_.active[best];
  graph_ = rebuild_graph(partial_, lattice_, cfg_.k_neighbors);
  current_slot_ = graph_.slot_of[current_id];
  if (current_slot_ < 0 || graph_.adj[current_slot_].empty())
    throw EnvError("reset: start node has no neighbors");

  visited_[current_id] = 1;
  frontiers_ = detect_frontiers(partial_);
  std::vector<Point> all_points = lattice_.points;
  utilities_ = utility_field(partial_, frontiers_, all_points, cfg_.sensor.range);
  rate_ = exploration_rate(partial_, truth_);
  replay_.push_back({0, current_id, 0.0, 0.0, 0.0, 0.0, rate_, 0.0});
}

StepResult ExploreEnv::step(int action) {
  if (done_) throw EnvError("step called on a finished episode");
  const auto& neighbors = graph_.adj[current_slot_];
  if (action < 0 || action >= static_cast<int>(neighbors.size()))
    throw std::invalid_argument("step: action index out of range");

  const int next_slot = neighbors[action];
  const int next_id = graph_.active[next_slot];
  const Point from = graph_.pos[current_slot_];
  const Point to = graph_.pos[next_slot];

  const FrontierSet pre_frontiers = frontiers_;
  std::vector<Cell> newly;
  const double len = traverse_and_sense(partial_, truth_, from, to, cfg_.sensor, &newly);

  frontiers_ = detect_frontiers(partial_);
  double r_o = 0.0;
  if (cfg_.frontier_mode == FrontierRewardMode::kObserved) {
    // Frontier cells of the pre-move map that the move resolved.
    std::vector<Cell> gone;
    std::set_difference(pre_frontiers.cells.begin(), pre_frontiers.cells.end(),
                        frontiers_.cells.begin(), frontiers_.cells.end(),
                        std::back_inserter(gone));
    r_o = static_cast<double>(gone.size());
  } else {
    r_o = node_utility(partial_, frontiers_, to, cfg_.sensor.range);
  }

  refresh_graph_keep_current(next_id);
  utility_field_update(partial_, frontiers_, lattice_.points, newly, cfg_.sensor.range,
                       utilities_);
  visited_[next_id] = 1;

  steps_ += 1;
  length_ += len;
  rate_ = exploration_rate(partial_, truth_);

  const bool completed_now =
      !finish_bonus_paid_ && rate_ > cfg_.reward.completion_threshold;
  if (completed_now) {
    finish_bonus_paid_ = true;
    completed_ = true;
  }
  done_ = completed_ || steps_ >= cfg_.step_budget;

  StepResult res;
  res.reward = total_reward(r_o, len, completed_now, cfg_.reward);
  res.done = done_;
  res.completed = completed_;
  res.info.r_o = r_o;
  res.info.r_c = -len;
  res.info.r_f = completed_now ? cfg_.reward.finish_bonus : 0.0;
  res.info.rate = rate_;
  res.info.length_so_far = length_;
  res.info.newly_classified = static_cast<int64_t>(newly.size());
  replay_.push_back({steps_, next_id, r_o, res.info.r_c, res.info.r_f, res.reward,
                     rate_, length_});
  res.obs = observation();
  return res;
}

void ExploreEnv::refresh_graph_keep_current(int current_lattice_id) {
  graph_ = rebuild_graph(partial_, lattice_, cfg_.k_neighbors);
  current_slot_ = graph_.slot_of[current_lattice_id];
  if (current_slot_ < 0)
    throw EnvError("step: current node dropped out of the graph");
  if (graph_.adj[current_slot_].empty())
    throw EnvError("step: dead end, current node has no neighbors");
}

Observation ExploreEnv::observation() const {
  return augment(graph_, lattice_, utilities_, visited_, current_slot_);
}

std::string replay_to_csv(const ExploreEnv& env) {
  std::ostringstream os;
  const EnvConfig& cfg = env.config();
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "# ARIADNE-REPLAY v1 width=%d height=%d lattice=%d k=%d ds=%g rays=%d "
                "stride=%g start_col=%d start_row=%d\n",
                env.truth().width, env.truth().height, cfg.lattice_count,
                cfg.k_neighbors, cfg.sensor.range, cfg.sensor.ray_count,
                cfg.sensor.update_stride, env.truth().start.col, env.truth().start.row);
  os << buf << "step,node,r_o,r_c,r_f,reward,rate,length\n";
  for (const ReplayRow& row : env.replay()) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.step,
                  row.node_id, row.r_o, row.r_c, row.r_f, row.reward, row.rate,
                  row.length);
    os << buf;
  }
  return os.str();
}

void save_replay(const ExploreEnv& env, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << replay_to_csv(env);
}

}  // namespace ariadne
