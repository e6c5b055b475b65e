#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fair/errors.hpp"
#include "fair/kernels.hpp"
#include "support.hpp"

using namespace fair;

namespace {

// 1-D midpoint double sum of exp(-(u-v)^2/2) over [a1,a2] x [b1,b2].
double axis_integral(double a1, double a2, double b1, double b2, int n) {
  const double ha = (a2 - a1) / n;
  const double hb = (b2 - b1) / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = a1 + (i + 0.5) * ha;
    for (int j = 0; j < n; ++j) {
      const double d = u - (b1 + (j + 0.5) * hb);
      total += std::exp(-0.5 * d * d);
    }
  }
  return total * ha * hb;
}

// Composite Simpson for the integral of Phi over [a, b].
double simpson_phi(double a, double b) {
  const int n = 2000;
  const double h = (b - a) / n;
  double s = std::erfc(-a / std::sqrt(2.0)) / 2 + std::erfc(-b / std::sqrt(2.0)) / 2;
  for (int i = 1; i < n; ++i) {
    s += (i % 2 ? 4.0 : 2.0) * std::erfc(-(a + i * h) / std::sqrt(2.0)) / 2;
  }
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("kernel values") {
  const auto g = CovarianceKernel::gaussian(1.0, 1.0);
  CHECK(g(0.0) == 1.0);
  CHECK(g(Point{0, 0}) == 1.0);
  CHECK(g(std::sqrt(2.0 * std::log(2.0))) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g(Point{3, 4}) == doctest::Approx(std::exp(-12.5)));
  const auto m = CovarianceKernel::matern(1.0, 0.5, 1.5);
  CHECK(m(0.5) == doctest::Approx(0.735758882342885).epsilon(1e-14));
  CHECK(m(0.0) == 1.0);
  const auto e = CovarianceKernel::exponential(2.0, 0.5);
  CHECK(e(1.0) == doctest::Approx(2.0 * std::exp(-2.0)));
}

TEST_CASE("half-integer Matern closed forms match the Bessel form") {
  for (double nu : {0.5, 1.5, 2.5}) {
    const auto k = CovarianceKernel::matern(1.0, 0.7, nu);
    for (double d : {1e-3, 0.05, 0.3, 1.0, 2.5, 7.0}) {
      CHECK(test::rel_diff(k(d), matern_correlation_bessel(d, 0.7, nu)) < 1e-12);
    }
  }
}

TEST_CASE("general Matern smoothness uses the Bessel form") {
  const auto k = CovarianceKernel::matern(2.0, 1.0, 1.0);
  CHECK(k(0.0) == 2.0);
  // nu = 1: u K_1(u).
  CHECK(k(1.3) == doctest::Approx(2.0 * 1.3 * std::cyl_bessel_k(1.0, 1.3)).epsilon(1e-12));
  CHECK(k(1e-300) == doctest::Approx(2.0));
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(CovarianceKernel::gaussian(-1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(CovarianceKernel::gaussian(1.0, -1.0), ConfigError);
  CHECK(CovarianceKernel::gaussian(0.0, 1.0)(0.5) == 0.0);
  CHECK_THROWS_AS(CovarianceKernel::matern(1.0, 1.0, 0.0), ConfigError);
  CHECK(parse_kernel_family("matern") == KernelFamily::kMatern);
  CHECK_THROWS_AS(parse_kernel_family("cauchy"), ConfigError);
}

TEST_CASE("correlation range") {
  const auto g = CovarianceKernel::gaussian(3.0, 1.0);
  CHECK(correlation_range(g, 0.05) == doctest::Approx(2.44775).epsilon(1e-5));
  CHECK(correlation_range(g, 0.25) == doctest::Approx(1.66511).epsilon(1e-5));
  const auto m = CovarianceKernel::matern(1.0, 0.5, 1.5);
  CHECK(correlation_range(m, 0.05) == doctest::Approx(2.371932).epsilon(1e-6));
  CHECK(correlation_range(m, 0.25) == doctest::Approx(1.346317).epsilon(1e-6));
  const auto e = CovarianceKernel::exponential(1.0, 2.0);
  CHECK(correlation_range(e, 0.05) == doctest::Approx(2.0 * std::log(20.0)));
  // Bisection on a non-closed-form smoothness still inverts the kernel.
  const auto m1 = CovarianceKernel::matern(1.0, 0.8, 1.0);
  CHECK(m1(correlation_range(m1, 0.1)) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK_THROWS_AS(correlation_range(g, 1.0), ConfigError);
}

TEST_CASE("integral of the normal CDF") {
  CHECK(int_std_normal_cdf(0, 0) == 0.0);
  CHECK(int_std_normal_cdf(-1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(int_std_normal_cdf(0, 2) == doctest::Approx(1.6095484).epsilon(1e-7));
  CHECK(int_std_normal_cdf(0, 2) == doctest::Approx(simpson_phi(0, 2)).epsilon(1e-10));
  CHECK(int_std_normal_cdf(2, 0) == doctest::Approx(-int_std_normal_cdf(0, 2)));
  CHECK(int_std_normal_cdf(-3.5, 0.7) == doctest::Approx(simpson_phi(-3.5, 0.7)).epsilon(1e-10));
}

TEST_CASE("rectangle integral matches a fine tensor Riemann sum") {
  const Rectangle a{0, 1, 0, 1};
  for (double delta : {0.0, 0.3, 1.5, 2.7}) {
    const Rectangle b{delta, 1 + delta, delta, 1 + delta};
    const double axis = axis_integral(0, 1, delta, 1 + delta, 2048);
    CHECK(test::rel_diff(gaussian_rect_cov(a, b), axis * axis) < 1e-6);
  }
  const Rectangle c{-0.5, 0.25, 1.0, 3.0};
  const Rectangle d{0.1, 0.9, -1.0, 0.5};
  const double oracle = axis_integral(-0.5, 0.25, 0.1, 0.9, 2048) * axis_integral(1, 3, -1, 0.5, 2048);
  CHECK(test::rel_diff(gaussian_rect_cov(c, d), oracle) < 1e-6);
}

TEST_CASE("ground-truth correlations for offset unit squares") {
  const Rectangle a{0, 1, 0, 1};
  CHECK(gaussian_rect_corr(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  const double deltas[] = {0.3, 0.9, 1.5, 2.1, 2.7};
  const double published[] = {0.926, 0.501, 0.147, 0.023, 0.002};
  const double frozen[] = {0.926231, 0.501475, 0.146600, 0.023022, 0.001929};
  for (int i = 0; i < 5; ++i) {
    const Rectangle b{deltas[i], 1 + deltas[i], deltas[i], 1 + deltas[i]};
    const double corr = gaussian_rect_corr(a, b);
    CHECK(std::abs(corr - published[i]) < 5e-4);
    CHECK(corr == doctest::Approx(frozen[i]).epsilon(1e-5));
  }
}

}  // TEST_SUITE
