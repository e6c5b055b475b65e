#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fair/grid.hpp"

namespace fair {

/// Simple closed polygon; the last vertex connects back to the first.
/// Construction validates: >= 3 vertices, consecutive vertices distinct,
/// no intersecting non-adjacent edges, nonzero signed area.
class Polygon {
 public:
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  double signed_area() const noexcept;
  double min_x() const noexcept { return min_.x; }
  double min_y() const noexcept { return min_.y; }
  double max_x() const noexcept { return max_.x; }
  double max_y() const noexcept { return max_.y; }

 private:
  std::vector<Point> vertices_;
  Point min_;
  Point max_;
};

/// Absolute shoelace area.
double polygon_area(const Polygon& poly);

/// Even-odd crossing test with a half-open boundary convention: points on a
/// left or bottom edge are inside, points on a right or top edge are outside.
/// Two polygons sharing an edge therefore never both claim a point on it.
bool point_in_polygon(const Polygon& poly, Point pt) noexcept;

/// Cell-fraction indicator of a polygon on a grid. Only the window covering
/// the polygon's bounding box (expanded by one cell, clipped to the grid) is
/// stored; all other cells are zero.
class IndicatorField {
 public:
  IndicatorField(const RegularGrid& grid, int ix0, int iy0, int width, int height,
                 std::vector<double> values);

  const RegularGrid& grid() const noexcept { return grid_; }
  int ix0() const noexcept { return ix0_; }
  int iy0() const noexcept { return iy0_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<double>& window_values() const noexcept { return values_; }

  /// Value at grid cell (ix, iy); zero outside the stored window.
  double operator()(int ix, int iy) const noexcept;

  /// sum(values) * cell area.
  double discrete_area() const noexcept;
  RealField to_dense() const;

  /// Grid indices of cells with a nonzero value.
  std::vector<std::pair<int, int>> support() const;

 private:
  RegularGrid grid_;
  int ix0_;
  int iy0_;
  int width_;
  int height_;
  std::vector<double> values_;
};

inline constexpr int kDefaultSupersample = 4;

/// Each cell's value is the fraction of its supersample x supersample
/// sub-cell centres lying inside the polygon (same half-open rule as
/// point_in_polygon). Cells not cut by an edge come out exactly 0 or 1.
/// Throws ConfigError if the polygon leaves the grid.
IndicatorField rasterize_fractional(const Polygon& poly, const RegularGrid& grid,
                                    int supersample = kDefaultSupersample);

struct RandomPolygonParams {
  int min_vertices = 3;
  int max_vertices = 12;
  double mean_radius = 1.0;
  /// Radii are drawn uniformly in mean_radius * [1 - irregularity, 1 + irregularity].
  double irregularity = 0.35;
};

/// Seeded star-shaped polygon around `center`. Angles are one jittered sample
/// per equal angular slot, so every angular gap stays below pi: the result is
/// simple and strictly contains `center`.
Polygon random_polygon(std::uint64_t seed, Point center, const RandomPolygonParams& params);

/// Bounding box of a set of polygons as {min, max}.
std::pair<Point, Point> bounding_box(std::span<const Polygon> regions);

namespace detail {
/// x at which the segment a-b crosses the horizontal line at y. Shared by the
/// point test and the rasterizer so both make bit-identical decisions.
inline double edge_crossing_x(Point a, Point b, double y) noexcept {
  return (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x;
}
}  // namespace detail

}  // namespace fair
