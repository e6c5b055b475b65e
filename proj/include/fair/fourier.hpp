#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fair/covmatrix.hpp"
#include "fair/geometry.hpp"
#include "fair/grid.hpp"
#include "fair/kernels.hpp"

namespace fair {

using ComplexField = Array2D<std::complex<double>>;
/// Complex field on the frequency grid mirroring a RegularGrid.
using SpectralField = ComplexField;

inline constexpr int kDefaultResolution = 1 << 10;

/// Square grid centred on the regions' joint bounding box with side
///   max(L + 2 theta_0.25, 2 theta_0.05) + extra_extent,
/// L being the longer bounding-box side.
RegularGrid build_grid(std::span<const Polygon> regions, const CovarianceKernel& kernel,
                       int resolution = kDefaultResolution, double extra_extent = 0.0);

/// Side length chosen by build_grid, exposed for reports.
double default_extent(std::span<const Polygon> regions, const CovarianceKernel& kernel);

/// Kernel sampled on the torus: entry (i, j) is c at lag
/// (min(i, nx - i) dx, min(j, ny - j) dy).
RealField sample_kernel_circular(const CovarianceKernel& kernel, const RegularGrid& grid);

/// Unnormalized forward DFT, exp(-2 pi i k.m / n) convention.
SpectralField dft2(const RealField& field);
SpectralField dft2(const ComplexField& field);
/// Unnormalized inverse DFT: idft2(dft2(f)) == f * nx * ny.
ComplexField idft2(const SpectralField& spectrum);

/// Real part of dft2(sample_kernel_circular(kernel, grid)). The circular
/// kernel is even, so its transform is real up to rounding.
RealField kernel_spectrum(const CovarianceKernel& kernel, const RegularGrid& grid);

/// Region transforms for a fixed set of indicator fields on one grid,
/// computed once and reused for every covariance matrix and prediction.
class FairEngine {
 public:
  explicit FairEngine(std::vector<IndicatorField> fields);

  const RegularGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return fields_.size(); }
  const std::vector<IndicatorField>& fields() const noexcept { return fields_; }
  /// Discrete areas sum(I) * cell area.
  const Eigen::VectorXd& areas() const noexcept { return areas_; }
  /// Column i holds the non-redundant half of dft2(field i): ny rows of
  /// nx/2+1 frequencies, flattened row-major. The rest follows from
  /// B[-k] = conj(B[k]).
  const Eigen::MatrixXcd& transforms() const noexcept { return transforms_; }

  /// K_ij = dA^2 / (N |B_i| |B_j|) * Re sum_m B_i[m] conj(B_j[m]) c_hat[m].
  /// `spectrum` must be even in k, as kernel_spectrum is.
  CovMatrix covariance(const CovarianceKernel& kernel) const;
  CovMatrix covariance(const RealField& spectrum, const CovarianceKernel& kernel) const;

  /// mean_field + (dA / N) * idft2(dft2(phi) * c_hat) with
  /// phi = sum_l beta_l / |B_l| * I_l.
  RealField predict(const Eigen::VectorXd& beta, const CovarianceKernel& kernel,
                    const RealField& mean_field) const;
  RealField predict(const Eigen::VectorXd& beta, const RealField& spectrum,
                    const RealField& mean_field) const;

 private:
  Eigen::VectorXd half_spectrum(const RealField& spectrum) const;

  RegularGrid grid_;
  std::vector<IndicatorField> fields_;
  Eigen::VectorXd areas_;
  Eigen::MatrixXcd transforms_;
};

CovMatrix fair_cov_matrix(std::vector<IndicatorField> fields, const CovarianceKernel& kernel,
                          const RegularGrid& grid);

RealField predict_surface(std::vector<IndicatorField> fields, const Eigen::VectorXd& beta,
                          const CovarianceKernel& kernel, const RegularGrid& grid,
                          const RealField& mean_field);

}  // namespace fair
