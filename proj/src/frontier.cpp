#include "ariadne/frontier.hpp"

#include <algorithm>

namespace ariadne {

FrontierSet detect_frontiers(const PartialMap& partial) {
  FrontierSet out;
  for (int r = 0; r < partial.height; ++r) {
    for (int c = 0; c < partial.width; ++c) {
      if (partial.at({c, r}) != KnownCell::kFree) continue;
      bool frontier = false;
      for (int dr = -1; dr <= 1 && !frontier; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          Cell n{c + dc, r + dr};
          if (partial.in_bounds(n) && partial.at(n) == KnownCell::kUnknown) {
            frontier = true;
            break;
          }
        }
      }
      if (frontier) out.cells.push_back({c, r});
    }
  }
  return out;  // row-major scan order == sorted by (row, col)
}

bool line_of_sight(const PartialMap& partial, Point a, Point b) {
  // Canonical endpoint order makes the result exactly symmetric.
  if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
  bool clear = true;
  supercover_walk(a, b, [&](int col, int row, double) {
    clear = partial.known_free({col, row});
    return clear;
  });
  return clear;
}

int node_utility(const PartialMap& partial, const FrontierSet& frontiers, Point node,
                 double d_s) {
  const double r2 = d_s * d_s;
  int count = 0;
  for (Cell f : frontiers.cells) {
    if (distance_sq(cell_center(f), node) > r2) continue;
    if (line_of_sight(partial, node, cell_center(f))) ++count;
  }
  return count;
}

FrontierIndex::FrontierIndex(const FrontierSet& frontiers, int map_width,
                             int map_height)
    : cells_(frontiers.cells) {
  buckets_x_ = std::max(1, (map_width + kBucket - 1) / kBucket);
  buckets_y_ = std::max(1, (map_height + kBucket - 1) / kBucket);
  grid_.resize(static_cast<size_t>(buckets_x_) * buckets_y_);
  for (Cell c : cells_) {
    grid_[static_cast<size_t>(c.row / kBucket) * buckets_x_ + c.col / kBucket]
        .push_back(c);
  }
}

namespace {

int node_utility_indexed(const PartialMap& partial, const FrontierIndex& index,
                         Point node, double d_s) {
  int count = 0;
  index.for_each_in_range(node, d_s, [&](Cell f) {
    if (line_of_sight(partial, node, cell_center(f))) ++count;
  });
  return count;
}

}  // namespace

std::vector<int> utility_field(const PartialMap& partial, const FrontierSet& frontiers,
                               const std::vector<Point>& nodes, double d_s,
                               bool parallel) {
  std::vector<int> out(nodes.size(), 0);
  if (frontiers.empty()) return out;
  FrontierIndex index(frontiers, partial.width, partial.height);
  const int64_t n = static_cast<int64_t>(nodes.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t i = 0; i < n; ++i) {
      out[i] = node_utility_indexed(partial, index, nodes[i], d_s);
    }
  } else {
    for (int64_t i = 0; i < n; ++i) {
      out[i] = node_utility_indexed(partial, index, nodes[i], d_s);
    }
  }
  return out;
}

void utility_field_update(const PartialMap& partial, const FrontierSet& frontiers,
                          const std::vector<Point>& nodes,
                          const std::vector<Cell>& newly_classified, double d_s,
                          std::vector<int>& utilities, bool parallel) {
  utilities.resize(nodes.size(), 0);
  if (frontiers.empty()) {
    std::fill(utilities.begin(), utilities.end(), 0);
    return;
  }
  if (newly_classified.empty()) return;

  // A node's utility can only change if some newly classified cell lies
  // within d_s + 1 of it: new/retired frontiers are within one cell of a
  // classified cell, and line-of-sight changes pass through one.
  int minc = newly_classified[0].col, maxc = minc;
  int minr = newly_classified[0].row, maxr = minr;
  for (Cell c : newly_classified) {
    minc = std::min(minc, c.col);
    maxc = std::max(maxc, c.col);
    minr = std::min(minr, c.row);
    maxr = std::max(maxr, c.row);
  }
  const double reach = d_s + 1.0;
  std::vector<int64_t> affected;
  for (int64_t i = 0; i < static_cast<int64_t>(nodes.size()); ++i) {
    const Point p = nodes[i];
    if (p.x < minc - reach || p.x > maxc + 1 + reach || p.y < minr - reach ||
        p.y > maxr + 1 + reach)
      continue;
    const double r2 = reach * reach;
    for (Cell c : newly_classified) {
      if (distance_sq(cell_center(c), p) <= r2) {
        affected.push_back(i);
        break;
      }
    }
  }

  FrontierIndex index(frontiers, partial.width, partial.height);
  const int64_t m = static_cast<int64_t>(affected.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t j = 0; j < m; ++j) {
      utilities[affected[j]] = node_utility_indexed(partial, index, nodes[affected[j]], d_s);
    }
  } else {
    for (int64_t j = 0; j < m; ++j) {
      utilities[affected[j]] = node_utility_indexed(partial, index, nodes[affected[j]], d_s);
    }
  }
}

}  // namespace ariadne
