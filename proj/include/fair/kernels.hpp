#pragma once

#include <string>
#include <string_view>

#include "fair/grid.hpp"

namespace fair {

enum class KernelFamily { kGaussian, kMatern, kExponential };

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily parse_kernel_family(std::string_view name);

/// Stationary isotropic covariance c(h) as a function of distance d = |h|.
///   gaussian:    sigma2 * exp(-d^2 / (2 theta^2))
///   matern:      sigma2 * 2^(1-nu) / Gamma(nu) * (d/theta)^nu * K_nu(d/theta)
///   exponential: sigma2 * exp(-d / theta)
/// Matern with nu in {0.5, 1.5, 2.5} uses the half-integer closed forms.
class CovarianceKernel {
 public:
  CovarianceKernel(KernelFamily family, double sigma2, double theta, double nu = 0.5);

  static CovarianceKernel gaussian(double sigma2 = 1.0, double theta = 1.0) {
    return {KernelFamily::kGaussian, sigma2, theta};
  }
  static CovarianceKernel matern(double sigma2, double theta, double nu) {
    return {KernelFamily::kMatern, sigma2, theta, nu};
  }
  static CovarianceKernel exponential(double sigma2, double theta) {
    return {KernelFamily::kExponential, sigma2, theta};
  }

  KernelFamily family() const noexcept { return family_; }
  double sigma2() const noexcept { return sigma2_; }
  double theta() const noexcept { return theta_; }
  double nu() const noexcept { return nu_; }

  CovarianceKernel with_sigma2(double sigma2) const { return {family_, sigma2, theta_, nu_}; }
  CovarianceKernel with_theta(double theta) const { return {family_, sigma2_, theta, nu_}; }

  /// c(d) for a distance d >= 0.
  double operator()(double distance) const noexcept;
  double operator()(Point lag) const noexcept;

  friend bool operator==(const CovarianceKernel&, const CovarianceKernel&) = default;

 private:
  KernelFamily family_;
  double sigma2_;
  double theta_;
  double nu_;
};

/// Matern correlation through the generic Bessel form, without the
/// half-integer shortcuts. Used to cross-check the closed forms.
double matern_correlation_bessel(double distance, double theta, double nu);

/// Distance at which c(d)/sigma2 decays to `fraction`, 0 < fraction < 1.
/// Closed form for gaussian and exponential, bisection (relative tol 1e-10)
/// for matern starting from the bracket [0, 50 theta].
double correlation_range(const CovarianceKernel& kernel, double fraction);

double std_normal_cdf(double w) noexcept;
double std_normal_pdf(double w) noexcept;

/// Integral of the standard normal CDF over [a, b]; b < a gives the negated value.
double int_std_normal_cdf(double a, double b) noexcept;

struct Rectangle {
  double x1, x2, y1, y2;
  double area() const noexcept { return (x2 - x1) * (y2 - y1); }
};

/// Exact double integral of exp(-|u - v|^2 / 2) over u in a, v in b.
double gaussian_rect_cov(const Rectangle& a, const Rectangle& b);

/// Correlation of the block averages over a and b under exp(-|h|^2 / 2).
double gaussian_rect_corr(const Rectangle& a, const Rectangle& b);

}  // namespace fair
