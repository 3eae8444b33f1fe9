#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ariadne/frontier.hpp"
#include "ariadne/gridmap.hpp"

namespace ariadne {

// Fixed grid of candidate viewpoints covering the map extent. Points are
// snapped to the centers of their containing cells so that all node-to-node
// segments have half-integer endpoints (exact corner-hit detection in the
// supercover walk).
struct NodeLattice {
  int rows = 0;
  int cols = 0;
  int map_width = 0;
  int map_height = 0;
  std::vector<Point> points;  // rows*cols, row-major

  int count() const { return rows * cols; }
};

// Factorization policy: r*c == count with the squarest aspect, ties broken
// toward the map's aspect ratio. Throws if count only admits degenerate grids.
NodeLattice build_lattice(int width, int height, int count);

struct CollisionFreeGraph {
  std::vector<int> active;            // lattice ids of active nodes, ascending
  std::vector<int> slot_of;           // lattice id -> slot, -1 if inactive
  std::vector<Point> pos;             // per slot
  std::vector<std::vector<int>> adj;  // per slot, sorted slot lists

  int count() const { return static_cast<int>(active.size()); }
  bool has_edge(int a, int b) const {
    for (int n : adj[a])
      if (n == b) return true;
    return false;
  }
};

// Nodes whose containing cell is known-free; candidate edges to the k nearest
// active neighbors, kept iff the straight segment crosses only known-free
// cells, symmetrized by union. `parallel` selects the OpenMP kernel; serial
// is the reference and both produce identical graphs.
CollisionFreeGraph rebuild_graph(const PartialMap& partial, const NodeLattice& lattice,
                                 int k, bool parallel = true);

// Observation graph: per-node (x, y, utility, visited) scaled to [0,1],
// adjacency, current node, and the current node's neighbor list (the action
// space, ascending slot order).
struct AugmentedGraph {
  int n = 0;
  std::vector<float> feat;  // n*4: x, y, u, b
  std::vector<std::vector<uint16_t>> adj;
  uint16_t current = 0;
  std::vector<uint16_t> neighbors;

  double feature(int slot, int f) const { return feat[static_cast<size_t>(slot) * 4 + f]; }
};

// utilities indexed by lattice id; visited is a lattice-id flag vector.
AugmentedGraph augment(const CollisionFreeGraph& graph, const NodeLattice& lattice,
                       const std::vector<int>& utilities,
                       const std::vector<uint8_t>& visited, int current_slot);

struct PathResult {
  bool reachable = false;
  std::vector<int> path;  // slots, [a .. b]
  double length = 0.0;
};

// Dijkstra with deterministic (distance, slot) tie-breaking.
PathResult shortest_path(const CollisionFreeGraph& graph, int a, int b);

// Single-source distances and predecessors for planner scoring.
struct ShortestPaths {
  std::vector<double> dist;  // infinity if unreachable
  std::vector<int> pred;     // -1 at source/unreachable
};
ShortestPaths shortest_paths_from(const CollisionFreeGraph& graph, int source);

// Reconstructs [source .. target] from predecessors; empty if unreachable.
std::vector<int> reconstruct_path(const ShortestPaths& sp, int source, int target);

}  // namespace ariadne
