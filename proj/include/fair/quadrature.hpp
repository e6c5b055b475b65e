#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fair/covmatrix.hpp"
#include "fair/geometry.hpp"
#include "fair/grid.hpp"
#include "fair/kernels.hpp"

namespace fair {

/// Quadrature nodes of one region. For grid-based sets `cells` holds the
/// grid indices of `points`; for [JH] sets it is empty.
struct PointSet {
  std::vector<Point> points;
  std::vector<std::pair<int, int>> cells;
};

/// Grid cell centres inside the polygon (half-open rule of point_in_polygon).
/// Throws ConfigError naming the region when a set is empty.
std::vector<PointSet> riemann_point_sets(std::span<const Polygon> regions, const RegularGrid& grid);

/// density x density points centred in a regular partition of the polygon's
/// bounding box, keeping those inside the polygon.
PointSet jh_point_set(const Polygon& poly, int density);

namespace detail {

/// Pair blocks are capped at 2^22 evaluations.
inline constexpr std::size_t kPairBlock = 2048;

/// (1 / (|P| |Q|)) sum_{p in P, q in Q} pair(p, q), streamed in blocks.
template <class PairCov>
double mean_pair_covariance(std::size_t size_p, std::size_t size_q, PairCov&& pair) {
  double total = 0.0;
  for (std::size_t p0 = 0; p0 < size_p; p0 += kPairBlock) {
    const std::size_t p1 = std::min(size_p, p0 + kPairBlock);
    for (std::size_t q0 = 0; q0 < size_q; q0 += kPairBlock) {
      const std::size_t q1 = std::min(size_q, q0 + kPairBlock);
      double block = 0.0;
      for (std::size_t p = p0; p < p1; ++p) {
        for (std::size_t q = q0; q < q1; ++q) block += pair(p, q);
      }
      total += block;
    }
  }
  return total / (static_cast<double>(size_p) * static_cast<double>(size_q));
}

}  // namespace detail

/// Symmetric matrix of mean pair covariances between point sets, with
/// `pair(set_i, p, set_j, q)` giving the covariance of two nodes.
template <class PairCov>
Eigen::MatrixXd pairwise_mean_covariance(std::span<const PointSet> sets, PairCov&& pair) {
  const long n = static_cast<long>(sets.size());
  Eigen::MatrixXd values(n, n);
#pragma omp parallel for schedule(dynamic)
  for (long idx = 0; idx < n * n; ++idx) {
    const long i = idx / n;
    const long j = idx % n;
    if (j < i) continue;
    const PointSet& a = sets[static_cast<std::size_t>(i)];
    const PointSet& b = sets[static_cast<std::size_t>(j)];
    const double v = detail::mean_pair_covariance(
        a.points.size(), b.points.size(),
        [&](std::size_t p, std::size_t q) { return pair(a, p, b, q); });
    values(i, j) = v;
    values(j, i) = v;
  }
  return values;
}

/// Direct Riemann double sum with true Euclidean lags.
CovMatrix riemann_cov_matrix(std::span<const PointSet> sets, const CovarianceKernel& kernel,
                             const RegularGrid& grid);
CovMatrix riemann_cov_matrix(std::span<const Polygon> regions, const CovarianceKernel& kernel,
                             const RegularGrid& grid);

/// Riemann double sum using a circular (torus) kernel table indexed by grid
/// lag, e.g. sample_kernel_circular. Needs grid-based point sets.
CovMatrix riemann_cov_matrix_circular(std::span<const PointSet> sets, const RealField& c_circ,
                                      const CovarianceKernel& kernel, const RegularGrid& grid);

/// [JH] per-region centred quadrature. Throws when a region keeps no points.
CovMatrix jh_cov_matrix(std::span<const Polygon> regions, const CovarianceKernel& kernel,
                        int density);

/// k(s)_i for one region: (1 / L) sum_k c(s - s_k) at every target s.
Eigen::VectorXd riemann_cross_vector(const PointSet& region, const CovarianceKernel& kernel,
                                     std::span<const Point> targets);

/// Grid point sets computed once; covariance matrices for any kernel.
class RiemannEngine {
 public:
  RiemannEngine(std::span<const Polygon> regions, const RegularGrid& grid);

  const RegularGrid& grid() const noexcept { return grid_; }
  const std::vector<PointSet>& point_sets() const noexcept { return sets_; }
  CovMatrix covariance(const CovarianceKernel& kernel) const;

 private:
  RegularGrid grid_;
  std::vector<PointSet> sets_;
};

}  // namespace fair
