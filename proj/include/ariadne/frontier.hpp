#pragma once

#include <vector>

#include "ariadne/gridmap.hpp"

namespace ariadne {

// Known-free cells with at least one unknown 8-neighbor, sorted by (row, col).
struct FrontierSet {
  std::vector<Cell> cells;

  bool empty() const { return cells.empty(); }
  size_t size() const { return cells.size(); }
};

FrontierSet detect_frontiers(const PartialMap& partial);

// True iff every supercover cell of segment [a,b] is known-free. Evaluated on
// the unordered segment, so line_of_sight(a,b) == line_of_sight(b,a) exactly.
bool line_of_sight(const PartialMap& partial, Point a, Point b);

// Number of frontier cells within Euclidean distance d_s of `node` (center to
// center) that pass line_of_sight.
int node_utility(const PartialMap& partial, const FrontierSet& frontiers, Point node,
                 double d_s);

// Utility per query point. `parallel` selects the OpenMP kernel; the serial
// path is the reference implementation and both produce identical results.
std::vector<int> utility_field(const PartialMap& partial, const FrontierSet& frontiers,
                               const std::vector<Point>& nodes, double d_s,
                               bool parallel = true);

// Incremental variant: recomputes utilities only for nodes within
// d_s + 1 of some newly classified cell, keeping previous values elsewhere.
// Observationally identical to utility_field on the updated map.
void utility_field_update(const PartialMap& partial, const FrontierSet& frontiers,
                          const std::vector<Point>& nodes,
                          const std::vector<Cell>& newly_classified, double d_s,
                          std::vector<int>& utilities, bool parallel = true);

// Spatial bucket index over frontier cells for range queries.
class FrontierIndex {
 public:
  FrontierIndex(const FrontierSet& frontiers, int map_width, int map_height);

  // Calls fn(cell) for every frontier cell with center distance <= d_s of p.
  template <class F>
  void for_each_in_range(Point p, double d_s, F&& fn) const {
    if (cells_.empty()) return;
    const double r2 = d_s * d_s;
    int b0 = std::max(0, static_cast<int>((p.x - d_s) / kBucket));
    int b1 = std::min(buckets_x_ - 1, static_cast<int>((p.x + d_s) / kBucket));
    int r0 = std::max(0, static_cast<int>((p.y - d_s) / kBucket));
    int r1 = std::min(buckets_y_ - 1, static_cast<int>((p.y + d_s) / kBucket));
    for (int br = r0; br <= r1; ++br) {
      for (int bc = b0; bc <= b1; ++bc) {
        const auto& bucket = grid_[static_cast<size_t>(br) * buckets_x_ + bc];
        for (Cell c : bucket) {
          if (distance_sq(cell_center(c), p) <= r2) fn(c);
        }
      }
    }
  }

 private:
  static constexpr int kBucket = 16;
  int buckets_x_ = 0, buckets_y_ = 0;
  std::vector<Cell> cells_;
  std::vector<std::vector<Cell>> grid_;
};

}  // namespace ariadne
