#include "ariadne/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace ariadne {

NodeLattice build_lattice(int width, int height, int count) {
  if (width <= 0 || height <= 0 || count <= 0)
    throw std::invalid_argument("build_lattice: invalid arguments");
  const double map_aspect = static_cast<double>(height) / width;
  double best_primary = std::numeric_limits<double>::infinity();
  double best_secondary = std::numeric_limits<double>::infinity();
  int best_r = 0;
  for (int r = 1; r <= count; ++r) {
    if (count % r != 0) continue;
    const int c = count / r;
    const double primary = static_cast<double>(std::max(r, c)) / std::min(r, c);
    const double secondary = std::abs(static_cast<double>(r) / c - map_aspect);
    if (primary < best_primary ||
        (primary == best_primary && secondary < best_secondary)) {
      best_primary = primary;
      best_secondary = secondary;
      best_r = r;
    }
  }
  const double worst_allowed = 4.0 * std::max(map_aspect, 1.0 / map_aspect);
  if (best_r == 0 || best_primary > worst_allowed)
    throw std::invalid_argument("build_lattice: count admits no usable grid");

  NodeLattice lattice;
  lattice.rows = best_r;
  lattice.cols = count / best_r;
  lattice.map_width = width;
  lattice.map_height = height;
  const std::vector<int> xs = uniform_axis_cells(width, lattice.cols);
  const std::vector<int> ys = uniform_axis_cells(height, lattice.rows);
  lattice.points.reserve(static_cast<size_t>(count));
  for (int i = 0; i < lattice.rows; ++i) {
    for (int j = 0; j < lattice.cols; ++j) {
      lattice.points.push_back(cell_center({xs[j], ys[i]}));
    }
  }
  return lattice;
}

namespace {

std::vector<int> knn_candidates(const std::vector<Point>& pos,
                                const std::vector<int>& active, int slot, int k) {
  const int n = static_cast<int>(pos.size());
  std::vector<std::pair<double, int>> dists;
  dists.reserve(n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == slot) continue;
    dists.emplace_back(distance_sq(pos[slot], pos[j]), j);
  }
  const int take = std::min<int>(k, static_cast<int>(dists.size()));
  std::partial_sort(dists.begin(), dists.begin() + take, dists.end(),
                    [&](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first < b.first;
                      return active[a.second] < active[b.second];
                    });
  std::vector<int> out(take);
  for (int i = 0; i < take; ++i) out[i] = dists[i].second;
  return out;
}

}  // namespace

CollisionFreeGraph rebuild_graph(const PartialMap& partial, const NodeLattice& lattice,
                                 int k, bool parallel) {
  if (k < 1) throw std::invalid_argument("rebuild_graph: k must be >= 1");
  CollisionFreeGraph g;
  g.slot_of.assign(lattice.points.size(), -1);
  for (size_t id = 0; id < lattice.points.size(); ++id) {
    if (partial.known_free(cell_of(lattice.points[id]))) {
      g.slot_of[id] = static_cast<int>(g.active.size());
      g.active.push_back(static_cast<int>(id));
      g.pos.push_back(lattice.points[id]);
    }
  }
  const int n = g.count();
  g.adj.assign(n, {});
  if (n < 2) return g;

  // Per-slot candidate edges that pass the collision check.
  std::vector<std::vector<int>> proposed(n);
  auto propose = [&](int slot) {
    for (int j : knn_candidates(g.pos, g.active, slot, k)) {
      if (line_of_sight(partial, g.pos[slot], g.pos[j])) proposed[slot].push_back(j);
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int slot = 0; slot < n; ++slot) propose(slot);
  } else {
    for (int slot = 0; slot < n; ++slot) propose(slot);
  }

  // Symmetrize by union.
  for (int slot = 0; slot < n; ++slot) {
    for (int j : proposed[slot]) {
      g.adj[slot].push_back(j);
      g.adj[j].push_back(slot);
    }
  }
  for (auto& list : g.adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return g;
}

AugmentedGraph augment(const CollisionFreeGraph& graph, const NodeLattice& lattice,
                       const std::vector<int>& utilities,
                       const std::vector<uint8_t>& visited, int current_slot) {
  if (current_slot < 0 || current_slot >= graph.count())
    throw std::invalid_argument("augment: current node is not active");
  AugmentedGraph out;
  out.n = graph.count();
  out.feat.resize(static_cast<size_t>(out.n) * 4);
  int max_u = 0;
  for (int slot = 0; slot < out.n; ++slot)
    max_u = std::max(max_u, utilities[graph.active[slot]]);
  const double norm = std::max(1, max_u);
  for (int slot = 0; slot < out.n; ++slot) {
    const int id = graph.active[slot];
    out.feat[slot * 4 + 0] = static_cast<float>(graph.pos[slot].x / lattice.map_width);
    out.feat[slot * 4 + 1] = static_cast<float>(graph.pos[slot].y / lattice.map_height);
    out.feat[slot * 4 + 2] = static_cast<float>(utilities[id] / norm);
    out.feat[slot * 4 + 3] = visited[id] ? 1.0f : 0.0f;
  }
  out.adj.resize(out.n);
  for (int slot = 0; slot < out.n; ++slot) {
    out.adj[slot].reserve(graph.adj[slot].size());
    for (int j : graph.adj[slot]) out.adj[slot].push_back(static_cast<uint16_t>(j));
  }
  out.current = static_cast<uint16_t>(current_slot);
  out.neighbors = out.adj[current_slot];
  return out;
}

ShortestPaths shortest_paths_from(const CollisionFreeGraph& graph, int source) {
  const int n = graph.count();
  ShortestPaths sp;
  sp.dist.assign(n, std::numeric_limits<double>::infinity());
  sp.pred.assign(n, -1);
  if (source < 0 || source >= n)
    throw std::invalid_argument("shortest_paths_from: bad source");
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  sp.dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > sp.dist[u]) continue;
    for (int v : graph.adj[u]) {
      const double nd = d + distance(graph.pos[u], graph.pos[v]);
      if (nd < sp.dist[v] || (nd == sp.dist[v] && sp.pred[v] > u)) {
        sp.dist[v] = nd;
        sp.pred[v] = u;
        heap.emplace(nd, v);
      }
    }
  }
  return sp;
}

std::vector<int> reconstruct_path(const ShortestPaths& sp, int source, int target) {
  if (target < 0 || target >= static_cast<int>(sp.dist.size())) return {};
  if (std::isinf(sp.dist[target])) return {};
  std::vector<int> path;
  for (int v = target; v != -1; v = sp.pred[v]) {
    path.push_back(v);
    if (v == source) break;
  }
  std::reverse(path.begin(), path.end());
  if (path.front() != source) return {};
  return path;
}

PathResult shortest_path(const CollisionFreeGraph& graph, int a, int b) {
  PathResult res;
  if (a == b) {
    res.reachable = true;
    res.path = {a};
    res.length = 0.0;
    return res;
  }
  ShortestPaths sp = shortest_paths_from(graph, a);
  if (std::isinf(sp.dist[b])) return res;
  res.reachable = true;
  res.path = reconstruct_path(sp, a, b);
  res.length = sp.dist[b];
  return res;
}

}  // namespace ariadne
