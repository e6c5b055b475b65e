#include "fair/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fair/errors.hpp"

namespace fair {

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::kGaussian: return "gaussian";
    case KernelFamily::kMatern: return "matern";
    case KernelFamily::kExponential: return "exponential";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "matern") return KernelFamily::kMatern;
  if (name == "exponential") return KernelFamily::kExponential;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

CovarianceKernel::CovarianceKernel(KernelFamily family, double sigma2, double theta, double nu)
    : family_(family), sigma2_(sigma2), theta_(theta), nu_(nu) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ConfigError("kernel sigma2 must be >= 0");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("kernel theta must be > 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("kernel nu must be > 0");
}

double matern_correlation_bessel(double distance, double theta, double nu) {
  if (distance == 0.0) return 1.0;
  const double u = distance / theta;
  if (u > 700.0) return 0.0;
  const double log_scale = (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu);
  return std::exp(log_scale + nu * std::log(u)) * std::cyl_bessel_k(nu, u);
}

double CovarianceKernel::operator()(double d) const noexcept {
  if (d == 0.0) return sigma2_;
  switch (family_) {
    case KernelFamily::kGaussian: {
      const double u = d / theta_;
      return sigma2_ * std::exp(-0.5 * u * u);
    }
    case KernelFamily::kExponential: return sigma2_ * std::exp(-d / theta_);
    case KernelFamily::kMatern: {
      const double u = d / theta_;
      if (nu_ == 0.5) return sigma2_ * std::exp(-u);
      if (nu_ == 1.5) return sigma2_ * (1.0 + u) * std::exp(-u);
      if (nu_ == 2.5) return sigma2_ * (1.0 + u + u * u / 3.0) * std::exp(-u);
      return sigma2_ * matern_correlation_bessel(d, theta_, nu_);
    }
  }
  return 0.0;
}

double CovarianceKernel::operator()(Point lag) const noexcept {
  return (*this)(std::hypot(lag.x, lag.y));
}

double correlation_range(const CovarianceKernel& kernel, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("correlation fraction must lie strictly between 0 and 1");
  }
  const double theta = kernel.theta();
  switch (kernel.family()) {
    case KernelFamily::kGaussian: return theta * std::sqrt(2.0 * std::log(1.0 / fraction));
    case KernelFamily::kExponential: return theta * std::log(1.0 / fraction);
    case KernelFamily::kMatern: break;
  }

  const CovarianceKernel unit = kernel.with_sigma2(1.0);
  double lo = 0.0;
  double hi = 50.0 * theta;
  while (unit(hi) > fraction) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("correlation range bracket diverged");
  }
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (unit(mid) > fraction) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double std_normal_cdf(double w) noexcept { return 0.5 * std::erfc(-w / std::numbers::sqrt2); }

double std_normal_pdf(double w) noexcept {
  return std::exp(-0.5 * w * w) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

namespace {
// Antiderivative of Phi: w Phi(w) + phi(w).
double cdf_antiderivative(double w) noexcept { return w * std_normal_cdf(w) + std_normal_pdf(w); }
}  // namespace

double int_std_normal_cdf(double a, double b) noexcept {
  return cdf_antiderivative(b) - cdf_antiderivative(a);
}

namespace {
void check_rectangle(const Rectangle& r) {
  if (!(r.x1 < r.x2) || !(r.y1 < r.y2)) throw ConfigError("degenerate rectangle");
}

// One axis of the separable integral, with the sign pattern of the closed form.
double axis_factor(double a1, double a2, double b1, double b2) noexcept {
  return -int_std_normal_cdf(b2 - a1, b2 - a2) + int_std_normal_cdf(b1 - a1, b1 - a2);
}
}  // namespace

double gaussian_rect_cov(const Rectangle& a, const Rectangle& b) {
  check_rectangle(a);
  check_rectangle(b);
  // exp(-h^2/2) = sqrt(2 pi) phi(h) per axis, so the Phi-integral product
  // carries a factor 2 pi.
  return 2.0 * std::numbers::pi * axis_factor(a.x1, a.x2, b.x1, b.x2) *
         axis_factor(a.y1, a.y2, b.y1, b.y2);
}

double gaussian_rect_corr(const Rectangle& a, const Rectangle& b) {
  return gaussian_rect_cov(a, b) / std::sqrt(gaussian_rect_cov(a, a) * gaussian_rect_cov(b, b));
}

}  // namespace fair
