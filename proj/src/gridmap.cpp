#include "ariadne/gridmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ariadne/rng.hpp"

namespace ariadne {

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::kEasy: return "easy";
    case Tier::kMedium: return "medium";
    case Tier::kComplex: return "complex";
    case Tier::kRandom: return "random";
  }
  return "?";
}

Tier tier_from_name(const std::string& name) {
  if (name == "easy") return Tier::kEasy;
  if (name == "medium") return Tier::kMedium;
  if (name == "complex") return Tier::kComplex;
  if (name == "random") return Tier::kRandom;
  throw std::invalid_argument("unknown tier: " + name);
}

void SensorConfig::validate() const {
  if (range <= 0) throw std::invalid_argument("sensor range must be > 0");
  if (ray_count < 4) throw std::invalid_argument("ray_count must be >= 4");
  if (update_stride <= 0) throw std::invalid_argument("update_stride must be > 0");
}

void MapGenConfig::validate() const {
  if (width < 16 || height < 16) throw std::invalid_argument("map too small");
  if (lattice_rows < 2 || lattice_cols < 2)
    throw std::invalid_argument("lattice must be at least 2x2");
  if (corridor_width < 3 || corridor_width % 2 == 0)
    throw std::invalid_argument("corridor_width must be odd and >= 3");
}

void GroundTruthMap::finalize_closure() {
  closure.assign(cells.size(), 0);
  explorable_count = 0;
  if (!in_bounds(start) || at(start) != TruthCell::kFree)
    throw std::runtime_error("map start cell is not free");
  std::deque<Cell> queue{start};
  closure[idx(start)] = 1;
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        Cell n{c.col + dc, c.row + dr};
        if (!in_bounds(n) || closure[idx(n)]) continue;
        closure[idx(n)] = 1;
        if (at(n) == TruthCell::kFree) queue.push_back(n);
        // Obstacles adjacent to the reachable set join the closure but are
        // not expanded.
      }
    }
  }
  for (uint8_t v : closure) explorable_count += v;
}

RaycastResult raycast(const GroundTruthMap& truth, Point origin, double angle,
                      double range) {
  Cell oc = cell_of(origin);
  if (!truth.in_bounds(oc)) throw std::invalid_argument("raycast origin out of bounds");
  if (truth.at(oc) != TruthCell::kFree)
    throw std::invalid_argument("raycast origin inside obstacle");
  if (range < 0) throw std::invalid_argument("raycast range must be >= 0");

  RaycastResult res;
  Point end{origin.x + range * std::cos(angle), origin.y + range * std::sin(angle)};
  res.kind = HitKind::kMaxRange;
  supercover_walk(origin, end, [&](int col, int row, double) {
    Cell c{col, row};
    if (!truth.in_bounds(c)) {
      res.kind = HitKind::kBoundary;
      return false;
    }
    res.cells.push_back(c);
    if (truth.at(c) == TruthCell::kObstacle) {
      res.kind = HitKind::kObstacle;
      return false;
    }
    return true;
  });
  return res;
}

int64_t sense_and_update(PartialMap& partial, const GroundTruthMap& truth, Point pose,
                         const SensorConfig& sensor,
                         std::vector<Cell>* newly_classified) {
  Cell pc = cell_of(pose);
  if (!truth.in_bounds(pc)) throw std::invalid_argument("sense pose out of bounds");
  if (truth.at(pc) != TruthCell::kFree)
    throw std::invalid_argument("sense pose inside obstacle");

  const double r2 = sensor.range * sensor.range;
  int64_t count = 0;
  auto classify = [&](Cell c, TruthCell label) {
    KnownCell& k = partial.cells[partial.idx(c)];
    if (k != KnownCell::kUnknown) return;
    k = label == TruthCell::kFree ? KnownCell::kFree : KnownCell::kOccupied;
    ++count;
    if (newly_classified) newly_classified->push_back(c);
  };

  for (int i = 0; i < sensor.ray_count; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / sensor.ray_count;
    Point end{pose.x + sensor.range * std::cos(angle),
              pose.y + sensor.range * std::sin(angle)};
    supercover_walk(pose, end, [&](int col, int row, double) {
      Cell c{col, row};
      if (!truth.in_bounds(c)) return false;
      TruthCell label = truth.at(c);
      if (distance_sq(cell_center(c), pose) <= r2) classify(c, label);
      return label == TruthCell::kFree;
    });
  }
  return count;
}

double traverse_and_sense(PartialMap& partial, const GroundTruthMap& truth, Point from,
                          Point to, const SensorConfig& sensor,
                          std::vector<Cell>* newly_classified) {
  bool clear = true;
  supercover_walk(from, to, [&](int col, int row, double) {
    clear = partial.known_free({col, row});
    return clear;
  });
  if (!clear) throw std::invalid_argument("traverse segment crosses non-free cell");

  const double len = distance(from, to);
  const int sweeps = static_cast<int>(std::floor(len / sensor.update_stride));
  for (int j = 0; j <= sweeps; ++j) {
    const double d = j * sensor.update_stride;
    const double t = len > 0 ? d / len : 0.0;
    Point p{from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)};
    sense_and_update(partial, truth, p, sensor, newly_classified);
  }
  if (len > 0 && sweeps * sensor.update_stride != len)
    sense_and_update(partial, truth, to, sensor, newly_classified);
  return len;
}

double exploration_rate(const PartialMap& partial, const GroundTruthMap& truth) {
  if (partial.width != truth.width || partial.height != truth.height)
    throw std::invalid_argument("exploration_rate: dimension mismatch");
  int64_t known = 0;
  for (size_t i = 0; i < partial.cells.size(); ++i) {
    if (truth.closure[i] && partial.cells[i] != KnownCell::kUnknown) ++known;
  }
  return static_cast<double>(known) / static_cast<double>(truth.explorable_count);
}

namespace {

struct Room {
  int x = 0, y = 0, w = 0, h = 0;  // cell rect [x, x+w) x [y, y+h)
  Cell port{0, 0};                 // lattice cell inside the room
};

struct GenAttempt {
  GroundTruthMap map;
  bool ok = false;
};

void carve_rect(GroundTruthMap& map, int x0, int y0, int x1, int y1, int16_t room_id) {
  x0 = std::max(x0, 1);
  y0 = std::max(y0, 1);
  x1 = std::min(x1, map.width - 1);
  y1 = std::min(y1, map.height - 1);
  for (int r = y0; r < y1; ++r) {
    for (int c = x0; c < x1; ++c) {
      map.cells[static_cast<size_t>(r) * map.width + c] = TruthCell::kFree;
      if (room_id >= 0) map.room_ids[static_cast<size_t>(r) * map.width + c] = room_id;
    }
  }
}

void carve_l_corridor(GroundTruthMap& map, Cell a, Cell b, int width, bool vertical_first) {
  const int hw = width / 2;
  if (vertical_first) {
    carve_rect(map, a.col - hw, std::min(a.row, b.row) - hw, a.col + hw + 1,
               std::max(a.row, b.row) + hw + 1, -1);
    carve_rect(map, std::min(a.col, b.col) - hw, b.row - hw,
               std::max(a.col, b.col) + hw + 1, b.row + hw + 1, -1);
  } else {
    carve_rect(map, std::min(a.col, b.col) - hw, a.row - hw,
               std::max(a.col, b.col) + hw + 1, a.row + hw + 1, -1);
    carve_rect(map, b.col - hw, std::min(a.row, b.row) - hw, b.col + hw + 1,
               std::max(a.row, b.row) + hw + 1, -1);
  }
}

bool free_cells_connected_4(const GroundTruthMap& map) {
  std::vector<uint8_t> seen(map.cells.size(), 0);
  int64_t total = 0;
  Cell first{-1, -1};
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (map.at({c, r}) == TruthCell::kFree) {
        ++total;
        if (first.col < 0) first = {c, r};
      }
    }
  }
  if (total == 0) return false;
  std::deque<Cell> queue{first};
  seen[map.idx(first)] = 1;
  int64_t reached = 1;
  const int dc[4] = {1, -1, 0, 0};
  const int dr[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      Cell n{c.col + dc[k], c.row + dr[k]};
      if (!map.in_bounds(n) || seen[map.idx(n)]) continue;
      if (map.at(n) != TruthCell::kFree) continue;
      seen[map.idx(n)] = 1;
      ++reached;
      queue.push_back(n);
    }
  }
  return reached == total;
}

GenAttempt try_generate(const MapGenConfig& cfg, Tier tier, Rng& rng) {
  GenAttempt out;
  GroundTruthMap& map = out.map;
  map.width = cfg.width;
  map.height = cfg.height;
  map.cells.assign(static_cast<size_t>(cfg.width) * cfg.height, TruthCell::kObstacle);
  map.room_ids.assign(map.cells.size(), -1);

  int want_min = 0, want_max = 0;
  double size_min = 0, size_max = 0;
  switch (tier) {
    case Tier::kEasy:
      want_min = want_max = cfg.easy_rooms;
      size_min = cfg.easy_size_min;
      size_max = cfg.easy_size_max;
      break;
    case Tier::kMedium:
      want_min = cfg.medium_rooms_min;
      want_max = cfg.medium_rooms_max;
      size_min = cfg.medium_size_min;
      size_max = cfg.medium_size_max;
      break;
    case Tier::kComplex:
      want_min = cfg.complex_rooms_min;
      want_max = cfg.complex_rooms_max;
      size_min = cfg.complex_size_min;
      size_max = cfg.complex_size_max;
      break;
    case Tier::kRandom:
      throw std::logic_error("random tier must be resolved before try_generate");
  }

  const std::vector<int> axis_x = uniform_axis_cells(cfg.width, cfg.lattice_cols);
  const std::vector<int> axis_y = uniform_axis_cells(cfg.height, cfg.lattice_rows);
  const int want = static_cast<int>(rng.next_int(want_min, want_max));
  const int gap = 3;

  std::vector<Room> rooms;
  for (int attempt = 0; attempt < 400 && static_cast<int>(rooms.size()) < want; ++attempt) {
    Room room;
    room.w = static_cast<int>(rng.next_double(size_min, size_max) * cfg.width);
    room.h = static_cast<int>(rng.next_double(size_min, size_max) * cfg.height);
    room.w = std::min(room.w, cfg.width - 4);
    room.h = std::min(room.h, cfg.height - 4);
    room.x = static_cast<int>(rng.next_int(2, cfg.width - room.w - 2));
    room.y = static_cast<int>(rng.next_int(2, cfg.height - room.h - 2));

    bool overlaps = false;
    for (const Room& other : rooms) {
      if (room.x < other.x + other.w + gap && other.x < room.x + room.w + gap &&
          room.y < other.y + other.h + gap && other.y < room.y + room.h + gap) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;

    // The room must contain a lattice cell with clearance, to serve as a
    // corridor port.
    const int margin = cfg.corridor_width / 2 + 1;
    std::vector<Cell> candidates;
    for (int xi : axis_x) {
      if (xi < room.x + margin || xi >= room.x + room.w - margin) continue;
      for (int yi : axis_y) {
        if (yi < room.y + margin || yi >= room.y + room.h - margin) continue;
        candidates.push_back({xi, yi});
      }
    }
    if (candidates.empty()) continue;
    Point center{room.x + room.w / 2.0, room.y + room.h / 2.0};
    room.port = *std::min_element(
        candidates.begin(), candidates.end(), [&](Cell a, Cell b) {
          double da = distance_sq(cell_center(a), center);
          double db = distance_sq(cell_center(b), center);
          if (da != db) return da < db;
          return a < b;
        });
    rooms.push_back(room);
  }
  if (static_cast<int>(rooms.size()) < want_min) return out;

  for (size_t i = 0; i < rooms.size(); ++i) {
    const Room& r = rooms[i];
    carve_rect(map, r.x, r.y, r.x + r.w, r.y + r.h, static_cast<int16_t>(i));
  }

  // Spanning tree over room ports (Prim), then L-corridors along lattice lines.
  const size_t n = rooms.size();
  if (n > 1) {
    std::vector<uint8_t> in_tree(n, 0);
    in_tree[0] = 1;
    std::vector<std::pair<size_t, size_t>> edges;
    for (size_t added = 1; added < n; ++added) {
      double best = std::numeric_limits<double>::infinity();
      size_t bi = 0, bj = 0;
      for (size_t i = 0; i < n; ++i) {
        if (!in_tree[i]) continue;
        for (size_t j = 0; j < n; ++j) {
          if (in_tree[j]) continue;
          double d = distance_sq(cell_center(rooms[i].port), cell_center(rooms[j].port));
          if (d < best) {
            best = d;
            bi = i;
            bj = j;
          }
        }
      }
      in_tree[bj] = 1;
      edges.emplace_back(bi, bj);
    }
    if (tier == Tier::kComplex && n > 2) {
      const int extra = static_cast<int>(rng.next_int(1, cfg.complex_extra_loops_max));
      for (int e = 0; e < extra; ++e) {
        size_t i = static_cast<size_t>(rng.next_below(n));
        size_t j = static_cast<size_t>(rng.next_below(n));
        if (i != j) edges.emplace_back(i, j);
      }
    }
    for (auto [i, j] : edges) {
      carve_l_corridor(map, rooms[i].port, rooms[j].port, cfg.corridor_width,
                       rng.next_bool());
    }
  }

  if (!free_cells_connected_4(map)) return out;

  // Designated start: a uniformly random free cell.
  std::vector<Cell> free_cells;
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (map.at({c, r}) == TruthCell::kFree) free_cells.push_back({c, r});
    }
  }
  map.start = free_cells[rng.next_below(free_cells.size())];
  map.finalize_closure();
  out.ok = true;
  return out;
}

}  // namespace

GroundTruthMap generate_dungeon(const MapGenConfig& cfg) {
  cfg.validate();
  for (int retry = 0; retry < 32; ++retry) {
    Rng rng(derive_seed(cfg.seed, "mapgen", static_cast<uint64_t>(retry)));
    Tier tier = cfg.tier;
    if (tier == Tier::kRandom) {
      tier = std::array<Tier, 3>{Tier::kEasy, Tier::kMedium,
                                 Tier::kComplex}[rng.next_below(3)];
    }
    GenAttempt attempt = try_generate(cfg, tier, rng);
    if (attempt.ok) return std::move(attempt.map);
  }
  throw std::runtime_error("dungeon generation failed after bounded retries");
}

std::string grid_to_string(const GroundTruthMap& map) {
  std::ostringstream os;
  os << "ARIADNE-GRID v1 " << map.width << ' ' << map.height << ' ' << map.start.col
     << ' ' << map.start.row << '\n';
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      os << (map.at({c, r}) == TruthCell::kFree ? '.' : '#');
    }
    os << '\n';
  }
  return os.str();
}

std::string grid_to_string(const PartialMap& partial, Cell start) {
  std::ostringstream os;
  os << "ARIADNE-GRID v1 " << partial.width << ' ' << partial.height << ' ' << start.col
     << ' ' << start.row << '\n';
  for (int r = 0; r < partial.height; ++r) {
    for (int c = 0; c < partial.width; ++c) {
      switch (partial.at({c, r})) {
        case KnownCell::kUnknown: os << 'U'; break;
        case KnownCell::kFree: os << '.'; break;
        case KnownCell::kOccupied: os << '#'; break;
      }
    }
    os << '\n';
  }
  return os.str();
}

GroundTruthMap grid_from_string(const std::string& text) {
  std::istringstream is(text);
  std::string magic, version;
  GroundTruthMap map;
  is >> magic >> version >> map.width >> map.height >> map.start.col >> map.start.row;
  if (!is || magic != "ARIADNE-GRID" || version != "v1")
    throw std::invalid_argument("not an ARIADNE-GRID v1 file");
  if (map.width <= 0 || map.height <= 0)
    throw std::invalid_argument("ARIADNE-GRID: invalid dimensions");
  std::string line;
  std::getline(is, line);  // rest of the header line
  map.cells.reserve(static_cast<size_t>(map.width) * map.height);
  for (int r = 0; r < map.height; ++r) {
    if (!std::getline(is, line) || static_cast<int>(line.size()) != map.width)
      throw std::invalid_argument("ARIADNE-GRID: bad row " + std::to_string(r));
    for (char ch : line) {
      if (ch == '.') {
        map.cells.push_back(TruthCell::kFree);
      } else if (ch == '#') {
        map.cells.push_back(TruthCell::kObstacle);
      } else {
        throw std::invalid_argument(std::string("ARIADNE-GRID: invalid character '") +
                                    ch + "'");
      }
    }
  }
  map.room_ids.assign(map.cells.size(), -1);
  if (!map.in_bounds(map.start) || map.at(map.start) != TruthCell::kFree)
    throw std::invalid_argument("ARIADNE-GRID: start cell is not free");
  map.finalize_closure();
  return map;
}

void save_grid(const GroundTruthMap& map, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << grid_to_string(map);
}

GroundTruthMap load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return grid_from_string(buf.str());
}

}  // namespace ariadne
