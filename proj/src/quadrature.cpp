#include "fair/quadrature.hpp"

#include <cmath>
#include <string>

#include "fair/errors.hpp"

namespace fair {

std::vector<PointSet> riemann_point_sets(std::span<const Polygon> regions, const RegularGrid& grid) {
  std::vector<PointSet> sets(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    PointSet& set = sets[r];
    set.cells = rasterize_fractional(regions[r], grid, 1).support();
    if (set.cells.empty()) {
      throw ConfigError("region " + std::to_string(r) +
                        " contains no grid points; refine the grid resolution");
    }
    set.points.reserve(set.cells.size());
    for (const auto& [ix, iy] : set.cells) set.points.push_back(grid.center(ix, iy));
  }
  return sets;
}

PointSet jh_point_set(const Polygon& poly, int density) {
  if (density < 1) throw ConfigError("[JH] density must be >= 1");
  PointSet set;
  const double wx = (poly.max_x() - poly.min_x()) / density;
  const double wy = (poly.max_y() - poly.min_y()) / density;
  for (int b = 0; b < density; ++b) {
    for (int a = 0; a < density; ++a) {
      const Point p{poly.min_x() + (a + 0.5) * wx, poly.min_y() + (b + 0.5) * wy};
      if (point_in_polygon(poly, p)) set.points.push_back(p);
    }
  }
  return set;
}

CovMatrix riemann_cov_matrix(std::span<const PointSet> sets, const CovarianceKernel& kernel,
                             const RegularGrid& grid) {
  Eigen::MatrixXd values = pairwise_mean_covariance(
      sets, [&kernel](const PointSet& a, std::size_t p, const PointSet& b, std::size_t q) {
        const Point u = a.points[p];
        const Point v = b.points[q];
        const double dx = u.x - v.x;
        const double dy = u.y - v.y;
        return kernel(std::sqrt(dx * dx + dy * dy));
      });
  return CovMatrix{std::move(values), CovMethod::kRiemann, grid.nx(), kernel};
}

CovMatrix riemann_cov_matrix(std::span<const Polygon> regions, const CovarianceKernel& kernel,
                             const RegularGrid& grid) {
  const std::vector<PointSet> sets = riemann_point_sets(regions, grid);
  return riemann_cov_matrix(sets, kernel, grid);
}

CovMatrix riemann_cov_matrix_circular(std::span<const PointSet> sets, const RealField& c_circ,
                                      const CovarianceKernel& kernel, const RegularGrid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  if (c_circ.nx() != nx || c_circ.ny() != ny) {
    throw ConfigError("circular kernel table does not match the grid");
  }
  for (const PointSet& s : sets) {
    if (s.cells.size() != s.points.size()) {
      throw ConfigError("circular Riemann sums need grid-based point sets");
    }
  }
  Eigen::MatrixXd values = pairwise_mean_covariance(
      sets, [&](const PointSet& a, std::size_t p, const PointSet& b, std::size_t q) {
        const int di = ((a.cells[p].first - b.cells[q].first) % nx + nx) % nx;
        const int dj = ((a.cells[p].second - b.cells[q].second) % ny + ny) % ny;
        return c_circ(di, dj);
      });
  return CovMatrix{std::move(values), CovMethod::kRiemann, nx, kernel};
}

CovMatrix jh_cov_matrix(std::span<const Polygon> regions, const CovarianceKernel& kernel,
                        int density) {
  std::vector<PointSet> sets;
  sets.reserve(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    sets.push_back(jh_point_set(regions[r], density));
    if (sets.back().points.empty()) {
      throw ConfigError("region " + std::to_string(r) + " has no [JH] points at density " +
                        std::to_string(density) + "; try a higher density");
    }
  }
  Eigen::MatrixXd values = pairwise_mean_covariance(
      std::span<const PointSet>(sets),
      [&kernel](const PointSet& a, std::size_t p, const PointSet& b, std::size_t q) {
        const double dx = a.points[p].x - b.points[q].x;
        const double dy = a.points[p].y - b.points[q].y;
        return kernel(std::sqrt(dx * dx + dy * dy));
      });
  return CovMatrix{std::move(values), CovMethod::kJh, density, kernel};
}

Eigen::VectorXd riemann_cross_vector(const PointSet& region, const CovarianceKernel& kernel,
                                     std::span<const Point> targets) {
  if (region.points.empty()) throw ConfigError("cross-covariance of an empty region");
  Eigen::VectorXd out(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double sum = 0.0;
    for (const Point& p : region.points) {
      const double dx = targets[t].x - p.x;
      const double dy = targets[t].y - p.y;
      sum += kernel(std::sqrt(dx * dx + dy * dy));
    }
    out[static_cast<Eigen::Index>(t)] = sum / static_cast<double>(region.points.size());
  }
  return out;
}

RiemannEngine::RiemannEngine(std::span<const Polygon> regions, const RegularGrid& grid)
    : grid_(grid), sets_(riemann_point_sets(regions, grid)) {}

CovMatrix RiemannEngine::covariance(const CovarianceKernel& kernel) const {
  return riemann_cov_matrix(sets_, kernel, grid_);
}

}  // namespace fair
