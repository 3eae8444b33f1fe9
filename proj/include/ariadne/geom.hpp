#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ariadne {

struct Cell {
  int col = 0;
  int row = 0;

  friend bool operator==(const Cell& a, const Cell& b) {
    return a.col == b.col && a.row == b.row;
  }
  friend bool operator!=(const Cell& a, const Cell& b) { return !(a == b); }
  friend bool operator<(const Cell& a, const Cell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point& a, const Point& b) {
    return a.x == b.x && a.y == b.y;
  }
};

inline Cell cell_of(Point p) {
  return {static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))};
}

inline Point cell_center(Cell c) { return {c.col + 0.5, c.row + 0.5}; }

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double distance_sq(Point a, Point b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Supercover traversal of the closed segment [a,b]: visits the grid cells the
// segment passes through, ordered by entry parameter t in [0,1]. At an exact
// corner crossing the two cells touched only at the corner point are visited
// first (smaller (row,col) first), then the diagonal cell.
//
// Boundary-crossing parameters are computed by direct division of exact
// numerators, never by accumulation. IEEE division is correctly rounded, so
// two crossings that are equal as real numbers compare equal here as well;
// corner hits on half-integer segment endpoints are detected exactly, and the
// cell sequence matches a per-cell slab-interval oracle using the same
// quotients.
//
// fn(col, row, t_entry) -> bool; returning false stops the walk.
template <class F>
void supercover_walk(Point a, Point b, F&& fn) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  int x = static_cast<int>(std::floor(a.x));
  int y = static_cast<int>(std::floor(a.y));
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;
  // Next grid line to be crossed along each axis.
  double bx = dx > 0 ? x + 1 : x;
  double by = dy > 0 ? y + 1 : y;
  const double kInf = std::numeric_limits<double>::infinity();
  double tx = dx != 0.0 ? (bx - a.x) / dx : kInf;
  double ty = dy != 0.0 ? (by - a.y) / dy : kInf;

  if (!fn(x, y, 0.0)) return;
  for (;;) {
    if (tx < ty) {
      if (tx > 1.0) return;
      const double t = tx;
      x += sx;
      bx += sx;
      tx = (bx - a.x) / dx;
      if (!fn(x, y, t)) return;
    } else if (ty < tx) {
      if (ty > 1.0) return;
      const double t = ty;
      y += sy;
      by += sy;
      ty = (by - a.y) / dy;
      if (!fn(x, y, t)) return;
    } else {
      // tx == ty: either both infinite (degenerate segment) or a corner hit.
      if (!(tx <= 1.0)) return;
      const double t = tx;
      const int cx = x + sx, cy = y + sy;
      // The two corner-grazed cells, ordered by (row, col).
      if (Cell{cx, y} < Cell{x, cy}) {
        if (!fn(cx, y, t)) return;
        if (!fn(x, cy, t)) return;
      } else {
        if (!fn(x, cy, t)) return;
        if (!fn(cx, y, t)) return;
      }
      x = cx;
      y = cy;
      bx += sx;
      by += sy;
      tx = (bx - a.x) / dx;
      ty = (by - a.y) / dy;
      if (!fn(x, y, t)) return;
    }
  }
}

inline std::vector<Cell> supercover(Point a, Point b) {
  std::vector<Cell> out;
  supercover_walk(a, b, [&](int c, int r, double) {
    out.push_back({c, r});
    return true;
  });
  return out;
}

// Cell indices of n uniformly spaced points along an axis of `extent` cells.
// Shared by the viewpoint lattice and the dungeon generator (which aligns
// corridors to lattice lines).
inline std::vector<int> uniform_axis_cells(int extent, int n) {
  std::vector<int> out(n);
  for (int j = 0; j < n; ++j) {
    out[j] = static_cast<int>(std::floor((j + 0.5) * static_cast<double>(extent) / n));
  }
  return out;
}

}  // namespace ariadne
