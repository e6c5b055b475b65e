#include "fair/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fair/errors.hpp"

namespace fair {
namespace {

double cross(Point o, Point a, Point b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point a, Point b, Point p) noexcept {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

int sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }

// Closed-segment intersection, touching included.
bool segments_intersect(Point p1, Point p2, Point q1, Point q2) noexcept {
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

}  // namespace

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw ConfigError("polygon needs at least 3 vertices");
  for (const Point& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ConfigError("polygon vertex is not finite");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (vertices_[i] == vertices_[(i + 1) % n]) {
      throw ConfigError("polygon has repeated consecutive vertex at index " + std::to_string(i));
    }
  }
  // Edge i runs from vertex i to vertex i+1; adjacent edges share an endpoint.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n])) {
        throw ConfigError("polygon is not simple: edges " + std::to_string(i) + " and " +
                          std::to_string(j) + " intersect");
      }
    }
  }
  if (signed_area() == 0.0) throw ConfigError("polygon has zero area");

  min_ = max_ = vertices_.front();
  for (const Point& p : vertices_) {
    min_.x = std::min(min_.x, p.x);
    min_.y = std::min(min_.y, p.y);
    max_.x = std::max(max_.x, p.x);
    max_.y = std::max(max_.y, p.y);
  }
}

double Polygon::signed_area() const noexcept {
  double twice = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double polygon_area(const Polygon& poly) {
  const double area = std::abs(poly.signed_area());
  if (area == 0.0) throw ConfigError("degenerate polygon with zero area");
  return area;
}

bool point_in_polygon(const Polygon& poly, Point pt) noexcept {
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % n];
    if ((a.y > pt.y) != (b.y > pt.y) && pt.x < detail::edge_crossing_x(a, b, pt.y)) {
      inside = !inside;
    }
  }
  return inside;
}

IndicatorField::IndicatorField(const RegularGrid& grid, int ix0, int iy0, int width, int height,
                               std::vector<double> values)
    : grid_(grid), ix0_(ix0), iy0_(iy0), width_(width), height_(height),
      values_(std::move(values)) {
  if (width < 0 || height < 0 || values_.size() != static_cast<std::size_t>(width) * height ||
      ix0 < 0 || iy0 < 0 || ix0 + width > grid.nx() || iy0 + height > grid.ny()) {
    throw ConfigError("indicator window does not fit its grid");
  }
}

double IndicatorField::operator()(int ix, int iy) const noexcept {
  const int lx = ix - ix0_;
  const int ly = iy - iy0_;
  if (lx < 0 || ly < 0 || lx >= width_ || ly >= height_) return 0.0;
  return values_[static_cast<std::size_t>(ly) * width_ + lx];
}

double IndicatorField::discrete_area() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * grid_.cell_area();
}

RealField IndicatorField::to_dense() const {
  RealField out(grid_.nx(), grid_.ny());
  for (int ly = 0; ly < height_; ++ly) {
    for (int lx = 0; lx < width_; ++lx) {
      out(ix0_ + lx, iy0_ + ly) = values_[static_cast<std::size_t>(ly) * width_ + lx];
    }
  }
  return out;
}

std::vector<std::pair<int, int>> IndicatorField::support() const {
  std::vector<std::pair<int, int>> cells;
  for (int ly = 0; ly < height_; ++ly) {
    for (int lx = 0; lx < width_; ++lx) {
      if (values_[static_cast<std::size_t>(ly) * width_ + lx] != 0.0) {
        cells.emplace_back(ix0_ + lx, iy0_ + ly);
      }
    }
  }
  return cells;
}

IndicatorField rasterize_fractional(const Polygon& poly, const RegularGrid& grid,
                                    int supersample) {
  if (supersample < 1) throw ConfigError("supersample must be >= 1");

  const Point lo = grid.origin();
  const Point hi{lo.x + grid.extent_x(), lo.y + grid.extent_y()};
  if (poly.min_x() < lo.x || poly.min_y() < lo.y || poly.max_x() > hi.x || poly.max_y() > hi.y) {
    std::ostringstream msg;
    msg << "polygon extends beyond grid: overflow left=" << std::max(0.0, lo.x - poly.min_x())
        << " right=" << std::max(0.0, poly.max_x() - hi.x)
        << " bottom=" << std::max(0.0, lo.y - poly.min_y())
        << " top=" << std::max(0.0, poly.max_y() - hi.y);
    throw ConfigError(msg.str());
  }

  const auto cell_of = [](double v, double origin, double step) {
    return static_cast<int>(std::floor((v - origin) / step));
  };
  const int ix0 = std::max(0, cell_of(poly.min_x(), lo.x, grid.dx()) - 1);
  const int iy0 = std::max(0, cell_of(poly.min_y(), lo.y, grid.dy()) - 1);
  const int ix1 = std::min(grid.nx() - 1, cell_of(poly.max_x(), lo.x, grid.dx()) + 1);
  const int iy1 = std::min(grid.ny() - 1, cell_of(poly.max_y(), lo.y, grid.dy()) + 1);
  const int width = ix1 - ix0 + 1;
  const int height = iy1 - iy0 + 1;

  const int ss = supersample;
  const double hx = grid.dx() / ss;
  const double hy = grid.dy() / ss;
  const long gx_begin = static_cast<long>(ix0) * ss;
  const long gx_end = static_cast<long>(ix1 + 1) * ss;
  const auto sub_x = [&](long g) { return lo.x + (g + 0.5) * hx; };
  // First sub-column whose centre is >= x.
  const auto first_at_or_after = [&](double x) {
    long g = static_cast<long>(std::ceil((x - lo.x) / hx - 0.5));
    g = std::clamp(g, gx_begin, gx_end);
    while (g > gx_begin && sub_x(g - 1) >= x) --g;
    while (g < gx_end && sub_x(g) < x) ++g;
    return g;
  };

  const auto& v = poly.vertices();
  const std::size_t nv = v.size();
  std::vector<int> counts(static_cast<std::size_t>(width) * height, 0);
  std::vector<double> crossings;
  crossings.reserve(nv);

  for (int iy = iy0; iy <= iy1; ++iy) {
    int* row = counts.data() + static_cast<std::size_t>(iy - iy0) * width;
    for (int q = 0; q < ss; ++q) {
      const double y = lo.y + (static_cast<long>(iy) * ss + q + 0.5) * hy;
      crossings.clear();
      for (std::size_t i = 0; i < nv; ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % nv];
        if ((a.y > y) != (b.y > y)) crossings.push_back(detail::edge_crossing_x(a, b, y));
      }
      std::sort(crossings.begin(), crossings.end());
      // A sub-centre is inside iff it lies in [c0, c1) or [c2, c3) ...
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        const long g0 = first_at_or_after(crossings[k]);
        const long g1 = first_at_or_after(crossings[k + 1]);
        if (g1 <= g0) continue;
        long g = g0;
        while (g < g1) {
          const long cell = g / ss;
          const long cell_end = std::min(g1, (cell + 1) * ss);
          row[cell - ix0] += static_cast<int>(cell_end - g);
          g = cell_end;
        }
      }
    }
  }

  const double per_hit = 1.0 / (static_cast<double>(ss) * ss);
  std::vector<double> values(counts.size());
  const int full = ss * ss;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    values[i] = counts[i] == full ? 1.0 : counts[i] * per_hit;
  }
  return IndicatorField(grid, ix0, iy0, width, height, std::move(values));
}

Polygon random_polygon(std::uint64_t seed, Point center, const RandomPolygonParams& params) {
  if (params.min_vertices < 3 || params.max_vertices < params.min_vertices) {
    throw ConfigError("random polygon needs 3 <= min_vertices <= max_vertices");
  }
  if (!(params.mean_radius > 0.0)) throw ConfigError("random polygon mean_radius must be > 0");
  if (!(params.irregularity >= 0.0 && params.irregularity < 1.0)) {
    throw ConfigError("random polygon irregularity must lie in [0, 1)");
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(params.min_vertices, params.max_vertices);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n = count_dist(rng);
  // Jitter of +-0.2 slot keeps consecutive angular gaps below 1.4 slots, which
  // is < pi for n >= 3, so the centre stays strictly inside.
  constexpr double kJitter = 0.2;
  const double slot = 2.0 * std::numbers::pi / n;
  const double r_lo = params.mean_radius * (1.0 - params.irregularity);
  const double r_hi = params.mean_radius * (1.0 + params.irregularity);

  std::vector<Point> vertices;
  vertices.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double angle = slot * (i + 0.5 + kJitter * (2.0 * unit(rng) - 1.0));
    const double radius = r_lo + (r_hi - r_lo) * unit(rng);
    vertices.push_back({center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)});
  }
  return Polygon(std::move(vertices));
}

std::pair<Point, Point> bounding_box(std::span<const Polygon> regions) {
  if (regions.empty()) throw ConfigError("bounding box of an empty region list");
  Point lo{regions.front().min_x(), regions.front().min_y()};
  Point hi{regions.front().max_x(), regions.front().max_y()};
  for (const Polygon& p : regions) {
    lo.x = std::min(lo.x, p.min_x());
    lo.y = std::min(lo.y, p.min_y());
    hi.x = std::max(hi.x, p.max_x());
    hi.y = std::max(hi.y, p.max_y());
  }
  return {lo, hi};
}

}  // namespace fair
