#include "fair/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "fair/errors.hpp"

namespace fair {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are unaligned so any buffer of the planned shape works.
enum class PlanKind { kComplex2d, kRealRow, kColumns, kComplexToReal2d };

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(PlanKind kind, int nx, int ny, int sign = FFTW_FORWARD) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(kind, nx, ny, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int half = nx / 2 + 1;
    const std::size_t complex_len = static_cast<std::size_t>(std::max(nx, half)) * ny;
    auto* c = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_len));
    auto* r = static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(nx) * ny));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    switch (kind) {
      case PlanKind::kComplex2d:
        plan = fftw_plan_dft_2d(ny, nx, c, c, sign, flags);
        break;
      case PlanKind::kRealRow:
        plan = fftw_plan_dft_r2c_1d(nx, r, c, flags);
        break;
      case PlanKind::kColumns:
        // In place over the ny x half layout: `half` transforms of length ny.
        plan = fftw_plan_many_dft(1, &ny, half, c, nullptr, half, 1, c, nullptr, half, 1, sign, flags);
        break;
      case PlanKind::kComplexToReal2d:
        plan = fftw_plan_dft_c2r_2d(ny, nx, c, r, flags);
        break;
    }
    fftw_free(c);
    fftw_free(r);
    if (plan == nullptr) throw NumericalError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<PlanKind, int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

void transform_in_place(std::complex<double>* data, int nx, int ny, int sign) {
  fftw_execute_dft(plan_cache().get(PlanKind::kComplex2d, nx, ny, sign), as_fftw(data), as_fftw(data));
}

// Non-redundant half of dft2(f) for a real field f, laid out ny x (nx/2+1).
// Rows outside the window are zero before the column pass, so only window
// rows are transformed.
void half_transform(const IndicatorField& f, int nx, int ny, std::complex<double>* out) {
  const int half = nx / 2 + 1;
  fftw_plan row_plan = plan_cache().get(PlanKind::kRealRow, nx, ny);
  std::vector<double> row(static_cast<std::size_t>(nx), 0.0);
  for (int ly = 0; ly < f.height(); ++ly) {
    const auto src = f.window_values().begin() + static_cast<std::ptrdiff_t>(ly) * f.width();
    std::copy(src, src + f.width(), row.begin() + f.ix0());
    fftw_execute_dft_r2c(row_plan, row.data(),
                         as_fftw(out + static_cast<std::size_t>(half) * (f.iy0() + ly)));
  }
  fftw_execute_dft(plan_cache().get(PlanKind::kColumns, nx, ny, FFTW_FORWARD), as_fftw(out),
                   as_fftw(out));
}

void require_dyadic(int nx, int ny) {
  if (!is_power_of_two(nx) || !is_power_of_two(ny)) {
    throw ConfigError("DFT dimensions must be powers of two, got " + std::to_string(nx) + " x " +
                      std::to_string(ny));
  }
}

}  // namespace

double default_extent(std::span<const Polygon> regions, const CovarianceKernel& kernel) {
  const auto [lo, hi] = bounding_box(regions);
  const double side = std::max(hi.x - lo.x, hi.y - lo.y);
  const double buffer = correlation_range(kernel, 0.25);
  const double decay = correlation_range(kernel, 0.05);
  return std::max(side + 2.0 * buffer, 2.0 * decay);
}

RegularGrid build_grid(std::span<const Polygon> regions, const CovarianceKernel& kernel,
                       int resolution, double extra_extent) {
  if (!is_power_of_two(resolution)) {
    throw ConfigError("grid resolution must be a power of two, got " + std::to_string(resolution));
  }
  const auto [lo, hi] = bounding_box(regions);
  const double extent = default_extent(regions, kernel) + extra_extent;
  return RegularGrid::square({0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}, extent, resolution);
}

RealField sample_kernel_circular(const CovarianceKernel& kernel, const RegularGrid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  RealField out(nx, ny);
  for (int j = 0; j < ny; ++j) {
    const double lag_y = std::min(j, ny - j) * grid.dy();
    for (int i = 0; i < nx; ++i) {
      const double lag_x = std::min(i, nx - i) * grid.dx();
      out(i, j) = kernel(Point{lag_x, lag_y});
    }
  }
  out(0, 0) = kernel.sigma2();
  return out;
}

SpectralField dft2(const ComplexField& field) {
  require_dyadic(field.nx(), field.ny());
  SpectralField out = field;
  transform_in_place(out.data(), out.nx(), out.ny(), FFTW_FORWARD);
  return out;
}

SpectralField dft2(const RealField& field) {
  require_dyadic(field.nx(), field.ny());
  SpectralField out(field.nx(), field.ny());
  std::copy(field.values().begin(), field.values().end(), out.values().begin());
  transform_in_place(out.data(), out.nx(), out.ny(), FFTW_FORWARD);
  return out;
}

ComplexField idft2(const SpectralField& spectrum) {
  require_dyadic(spectrum.nx(), spectrum.ny());
  ComplexField out = spectrum;
  transform_in_place(out.data(), out.nx(), out.ny(), FFTW_BACKWARD);
  return out;
}

RealField kernel_spectrum(const CovarianceKernel& kernel, const RegularGrid& grid) {
  const SpectralField c_hat = dft2(sample_kernel_circular(kernel, grid));
  RealField out(grid.nx(), grid.ny());
  for (std::size_t m = 0; m < c_hat.size(); ++m) out.values()[m] = c_hat.values()[m].real();
  return out;
}

FairEngine::FairEngine(std::vector<IndicatorField> fields)
    : grid_(fields.empty() ? throw ConfigError("FAIR needs at least one region")
                           : fields.front().grid()),
      fields_(std::move(fields)) {
  const std::size_t n = fields_.size();
  areas_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(fields_[i].grid() == grid_)) {
      throw ConfigError("indicator field " + std::to_string(i) + " lives on a different grid");
    }
    areas_[static_cast<Eigen::Index>(i)] = fields_[i].discrete_area();
    if (!(areas_[static_cast<Eigen::Index>(i)] > 0.0)) {
      throw ConfigError("region " + std::to_string(i) + " has zero discrete area on this grid");
    }
  }

  const Eigen::Index half_cells = static_cast<Eigen::Index>(grid_.ny()) * (grid_.nx() / 2 + 1);
  transforms_.setZero(half_cells, static_cast<Eigen::Index>(n));
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    half_transform(fields_[static_cast<std::size_t>(i)], grid_.nx(), grid_.ny(), transforms_.col(i).data());
  }
}

Eigen::VectorXd FairEngine::half_spectrum(const RealField& spectrum) const {
  if (spectrum.nx() != grid_.nx() || spectrum.ny() != grid_.ny()) {
    throw ConfigError("kernel spectrum does not match the engine grid");
  }
  const int half = grid_.nx() / 2 + 1;
  Eigen::VectorXd out(transforms_.rows());
  for (int ky = 0; ky < grid_.ny(); ++ky) {
    for (int kx = 0; kx < half; ++kx) out[static_cast<Eigen::Index>(ky) * half + kx] = spectrum(kx, ky);
  }
  return out;
}

CovMatrix FairEngine::covariance(const CovarianceKernel& kernel) const {
  return covariance(kernel_spectrum(kernel, grid_), kernel);
}

CovMatrix FairEngine::covariance(const RealField& spectrum, const CovarianceKernel& kernel) const {
  const Eigen::VectorXd c_half = half_spectrum(spectrum);
  const Eigen::Index n = transforms_.cols();
  const Eigen::Index rows = 2 * transforms_.rows();
  const int nx = grid_.nx();
  const int half = nx / 2 + 1;

  // Frequencies k and -k contribute conjugate terms with equal c_hat, so the
  // full real sum is the half sum with interior columns counted twice. Each
  // complex entry becomes a (re, im) pair, and Re(conj(a) b) is their dot product.
  Eigen::VectorXd weight(rows);
  for (Eigen::Index m = 0; m < transforms_.rows(); ++m) {
    const int kx = static_cast<int>(m % half);
    const double w = (kx == 0 || 2 * kx == nx) ? c_half[m] : 2.0 * c_half[m];
    weight[2 * m] = weight[2 * m + 1] = w;
  }
  const Eigen::Map<const Eigen::MatrixXd> parts(reinterpret_cast<const double*>(transforms_.data()),
                                                rows, n);

  // Upper triangle, streamed over frequency blocks so the weighted copy stays small.
  constexpr Eigen::Index kBlock = 1 << 12;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd weighted;
  for (Eigen::Index start = 0; start < rows; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, rows - start);
    const auto block = parts.middleRows(start, len);
    weighted = weight.segment(start, len).asDiagonal() * block;
    sums.triangularView<Eigen::Upper>() += block.transpose() * weighted;
  }

  const double cell_area = grid_.cell_area();
  const double scale = cell_area * cell_area / static_cast<double>(grid_.size());
  Eigen::MatrixXd values(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      values(i, j) = values(j, i) = sums(i, j) * scale / (areas_[i] * areas_[j]);
    }
  }
  return CovMatrix{std::move(values), CovMethod::kFair, grid_.nx(), kernel};
}

RealField FairEngine::predict(const Eigen::VectorXd& beta, const CovarianceKernel& kernel,
                              const RealField& mean_field) const {
  return predict(beta, kernel_spectrum(kernel, grid_), mean_field);
}

RealField FairEngine::predict(const Eigen::VectorXd& beta, const RealField& spectrum,
                              const RealField& mean_field) const {
  if (beta.size() != transforms_.cols()) {
    throw ConfigError("beta has " + std::to_string(beta.size()) + " entries for " +
                      std::to_string(transforms_.cols()) + " regions");
  }
  if (mean_field.nx() != grid_.nx() || mean_field.ny() != grid_.ny() ||
      spectrum.nx() != grid_.nx() || spectrum.ny() != grid_.ny()) {
    throw ConfigError("prediction inputs do not match the engine grid");
  }
  const Eigen::VectorXd weights = beta.cwiseQuotient(areas_);
  Eigen::VectorXcd phi_hat = transforms_ * weights.cast<std::complex<double>>();
  phi_hat.array() *= half_spectrum(spectrum).array();

  // The product spectrum is Hermitian, so the complex-to-real inverse returns
  // the real part of the full inverse transform.
  RealField out(grid_.nx(), grid_.ny());
  fftw_execute_dft_c2r(plan_cache().get(PlanKind::kComplexToReal2d, grid_.nx(), grid_.ny()),
                       as_fftw(phi_hat.data()), out.data());
  const double scale = grid_.cell_area() / static_cast<double>(grid_.size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    out.values()[m] = mean_field.values()[m] + scale * out.values()[m];
  }
  return out;
}

CovMatrix fair_cov_matrix(std::vector<IndicatorField> fields, const CovarianceKernel& kernel,
                          const RegularGrid& grid) {
  for (const IndicatorField& f : fields) {
    if (!(f.grid() == grid)) throw ConfigError("indicator field is not on the requested grid");
  }
  return FairEngine(std::move(fields)).covariance(kernel);
}

RealField predict_surface(std::vector<IndicatorField> fields, const Eigen::VectorXd& beta,
                          const CovarianceKernel& kernel, const RegularGrid& grid,
                          const RealField& mean_field) {
  for (const IndicatorField& f : fields) {
    if (!(f.grid() == grid)) throw ConfigError("indicator field is not on the requested grid");
  }
  return FairEngine(std::move(fields)).predict(beta, kernel, mean_field);
}

}  // namespace fair
