#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ariadne/geom.hpp"

namespace ariadne {

enum class TruthCell : uint8_t { kFree = 0, kObstacle = 1 };
enum class KnownCell : uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

enum class Tier { kEasy, kMedium, kComplex, kRandom };

const char* tier_name(Tier t);
Tier tier_from_name(const std::string& name);

struct GroundTruthMap {
  int width = 0;
  int height = 0;
  std::vector<TruthCell> cells;
  // Room id per cell, -1 outside rooms; emitted by the generator so tests can
  // count rooms by flood fill.
  std::vector<int16_t> room_ids;
  Cell start{0, 0};
  // Explorable closure: free cells 8-reachable from the start, plus obstacle
  // cells 8-adjacent to that set. Unreachable pockets stay outside.
  std::vector<uint8_t> closure;
  int64_t explorable_count = 0;

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height;
  }
  size_t idx(Cell c) const { return static_cast<size_t>(c.row) * width + c.col; }
  TruthCell at(Cell c) const { return cells[idx(c)]; }
  bool free_at(Cell c) const { return in_bounds(c) && at(c) == TruthCell::kFree; }
  bool in_closure(Cell c) const { return closure[idx(c)] != 0; }

  // Recomputes closure and explorable_count from `start`.
  void finalize_closure();
};

struct PartialMap {
  int width = 0;
  int height = 0;
  std::vector<KnownCell> cells;

  PartialMap() = default;
  PartialMap(int w, int h)
      : width(w), height(h), cells(static_cast<size_t>(w) * h, KnownCell::kUnknown) {}

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height;
  }
  size_t idx(Cell c) const { return static_cast<size_t>(c.row) * width + c.col; }
  KnownCell at(Cell c) const { return cells[idx(c)]; }
  bool known_free(Cell c) const { return in_bounds(c) && at(c) == KnownCell::kFree; }
  bool known(Cell c) const { return at(c) != KnownCell::kUnknown; }
};

struct SensorConfig {
  double range = 80.0;     // d_s, in cells
  int ray_count = 360;     // rays per 360-degree sweep
  double update_stride = 5.0;  // cells traveled between sweeps

  void validate() const;
};

struct MapGenConfig {
  uint64_t seed = 0;
  Tier tier = Tier::kRandom;
  int width = 640;
  int height = 480;
  // Corridors are carved along the viewpoint lattice lines so rooms stay
  // reachable through the fixed roadmap; see roadmap.hpp.
  int lattice_rows = 30;
  int lattice_cols = 30;
  int corridor_width = 7;
  // Room count and size ranges per tier, as fractions of the map dimensions.
  int easy_rooms = 1;
  int medium_rooms_min = 2, medium_rooms_max = 4;
  int complex_rooms_min = 5, complex_rooms_max = 8;
  double easy_size_min = 0.45, easy_size_max = 0.75;
  double medium_size_min = 0.22, medium_size_max = 0.40;
  double complex_size_min = 0.16, complex_size_max = 0.30;
  int complex_extra_loops_max = 3;

  void validate() const;
};

enum class HitKind { kObstacle, kMaxRange, kBoundary };

struct RaycastResult {
  std::vector<Cell> cells;  // traversed cells in entry order; obstacle last if hit
  HitKind kind = HitKind::kMaxRange;
};

// Supercover ray from `origin` at `angle` (radians), stopping at the first
// obstacle cell, the range limit, or the map boundary.
// Throws std::invalid_argument if origin is out of bounds or inside an obstacle.
RaycastResult raycast(const GroundTruthMap& truth, Point origin, double angle,
                      double range);

// Casts sensor.ray_count rays over 360 degrees and classifies every traversed
// cell whose center lies within sensor.range of the pose. Returns the number
// of cells that left unknown. Newly classified cells are appended to
// *newly_classified when non-null.
int64_t sense_and_update(PartialMap& partial, const GroundTruthMap& truth, Point pose,
                         const SensorConfig& sensor,
                         std::vector<Cell>* newly_classified = nullptr);

// Sweeps sense_and_update at points spaced sensor.update_stride apart along
// [from, to], endpoints included. Returns the Euclidean segment length.
// Throws std::invalid_argument if the segment crosses a cell that is not
// known-free.
double traverse_and_sense(PartialMap& partial, const GroundTruthMap& truth, Point from,
                          Point to, const SensorConfig& sensor,
                          std::vector<Cell>* newly_classified = nullptr);

// |known cells within the explorable closure| / explorable_count.
double exploration_rate(const PartialMap& partial, const GroundTruthMap& truth);

// Random dungeon generator: rejection-sampled rooms joined by L-shaped
// corridors along a spanning tree, plus tier-dependent extra loops.
// Throws std::runtime_error after bounded retries on degenerate parameters.
GroundTruthMap generate_dungeon(const MapGenConfig& cfg);

// "ARIADNE-GRID v1" file format.
std::string grid_to_string(const GroundTruthMap& map);
std::string grid_to_string(const PartialMap& partial, Cell start);
GroundTruthMap grid_from_string(const std::string& text);
void save_grid(const GroundTruthMap& map, const std::string& path);
GroundTruthMap load_grid(const std::string& path);

}  // namespace ariadne
