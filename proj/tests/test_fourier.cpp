#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fair/errors.hpp"
#include "fair/fourier.hpp"
#include "fair/quadrature.hpp"
#include "support.hpp"

using namespace fair;

namespace {

Polygon square(double x0, double y0, double side = 1.0) {
  return Polygon({{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}});
}

std::vector<Polygon> seeded_polygons(int count, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Polygon> out;
  for (int i = 0; i < count; ++i) {
    const Point c{u(rng), u(rng)};
    out.push_back(random_polygon(seed * 1000 + i, c, {}));
  }
  return out;
}

std::vector<IndicatorField> rasterize_all(const std::vector<Polygon>& polys,
                                          const RegularGrid& grid, int ss) {
  std::vector<IndicatorField> fields;
  for (const Polygon& p : polys) fields.push_back(rasterize_fractional(p, grid, ss));
  return fields;
}

// Spatial circular double sum over cell pairs, weighted by indicator values.
Eigen::MatrixXd circular_double_sum(const std::vector<IndicatorField>& fields,
                                    const RealField& c_circ, const RegularGrid& grid) {
  const auto n = static_cast<Eigen::Index>(fields.size());
  Eigen::MatrixXd k(n, n);
  const int nx = grid.nx(), ny = grid.ny();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& fi = fields[static_cast<std::size_t>(i)];
      const auto& fj = fields[static_cast<std::size_t>(j)];
      double total = 0.0, wi = 0.0, wj = 0.0;
      for (auto [ax, ay] : fi.support()) wi += fi(ax, ay);
      for (auto [bx, by] : fj.support()) wj += fj(bx, by);
      for (auto [ax, ay] : fi.support()) {
        for (auto [bx, by] : fj.support()) {
          const int lx = ((ax - bx) % nx + nx) % nx;
          const int ly = ((ay - by) % ny + ny) % ny;
          total += fi(ax, ay) * fj(bx, by) * c_circ(lx, ly);
        }
      }
      k(i, j) = total / (wi * wj);
    }
  }
  return k;
}

double max_rel_entry(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, test::rel_diff(a.data()[i], b.data()[i]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("fourier") {

TEST_CASE("default extent rule") {
  const std::vector<Polygon> unit{square(0, 0)};
  CHECK(default_extent(unit, CovarianceKernel::gaussian()) == doctest::Approx(4.8955).epsilon(1e-4));
  const std::vector<Polygon> wide{square(-10, -10, 20)};
  CHECK(default_extent(wide, CovarianceKernel::matern(1, 0.5, 1.5)) ==
        doctest::Approx(22.6926).epsilon(1e-5));
  const std::vector<Polygon> dot{Polygon({{0, 0}, {1e-6, 0}, {0, 1e-6}})};
  const double theta = 2.0 / std::sqrt(2.0 * std::log(20.0));
  CHECK(default_extent(dot, CovarianceKernel::gaussian(1, theta)) == doctest::Approx(4.0));
}

TEST_CASE("build grid centres on the regions and honours the resolution") {
  const std::vector<Polygon> regions{square(0, 0), square(2, 0)};
  const auto kernel = CovarianceKernel::gaussian();
  const RegularGrid grid = build_grid(regions, kernel, 64, 1.0);
  CHECK(grid.nx() == 64);
  CHECK(grid.ny() == 64);
  const double extent = default_extent(regions, kernel) + 1.0;
  CHECK(grid.extent_x() == doctest::Approx(extent));
  CHECK(grid.origin().x + extent / 2 == doctest::Approx(1.5));
  CHECK(grid.origin().y + extent / 2 == doctest::Approx(0.5));
  CHECK_THROWS_AS(build_grid(regions, kernel, 100), ConfigError);
}

TEST_CASE("circular kernel sampling") {
  const auto g = CovarianceKernel::gaussian(2.0, 1.0);
  const RegularGrid grid = RegularGrid::square({0, 0}, 8.0, 64);
  const RealField c = sample_kernel_circular(g, grid);
  CHECK(c(0, 0) == 2.0);
  for (int i = 1; i < 64; ++i) {
    CHECK(c(i, 5) == c(64 - i, 5));
    CHECK(c(5, i) == c(5, 64 - i));
  }
  const RealField c1 = sample_kernel_circular(CovarianceKernel::gaussian(), grid);
  CHECK(c1(32, 0) == doctest::Approx(3.35e-4).epsilon(1e-3));
  CHECK(c1(32, 0) == doctest::Approx(std::exp(-8.0)));
}

TEST_CASE("DFT basics") {
  const RealField constant(16, 16, 2.5);
  const SpectralField s = dft2(constant);
  CHECK(std::abs(s(0, 0) - std::complex<double>(2.5 * 256, 0)) < 1e-12);
  double off = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) off = std::max(off, std::abs(s.values()[i]));
  CHECK(off < 1e-12);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  RealField f(32, 16);
  for (double& v : f.values()) v = g(rng);
  const ComplexField back = idft2(dft2(f));
  double energy = 0.0, spectral = 0.0, worst = 0.0;
  const SpectralField sf = dft2(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    worst = std::max(worst, std::abs(back.values()[i] / 512.0 - f.values()[i]));
    energy += f.values()[i] * f.values()[i];
    spectral += std::norm(sf.values()[i]);
  }
  CHECK(worst < 1e-12);
  CHECK(test::rel_diff(energy, spectral / 512.0) < 1e-10);
}

TEST_CASE("single-bin DFT follows the exp(-2 pi i k.m / n) convention") {
  RealField f(8, 8, 0.0);
  f(1, 0) = 1.0;
  const SpectralField s = dft2(f);
  for (int k = 0; k < 8; ++k) {
    const double angle = -2.0 * std::numbers::pi * k / 8.0;
    CHECK(std::abs(s(k, 3) - std::polar(1.0, angle)) < 1e-14);
  }
}

TEST_CASE("kernel spectrum is real and sums to the zero-lag value") {
  const auto m = CovarianceKernel::matern(1.0, 0.5, 1.5);
  const RegularGrid grid = RegularGrid::square({0, 0}, 6.0, 32);
  const RealField spectrum = kernel_spectrum(m, grid);
  double total = 0.0;
  for (double v : spectrum.values()) total += v;
  CHECK(total / grid.size() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant kernel gives sigma2 everywhere") {
  const std::vector<Polygon> polys = seeded_polygons(4, 11, 2.0);
  const RegularGrid grid = RegularGrid::square({0, 0}, 8.0, 64);
  const auto flat = CovarianceKernel::gaussian(3.0, 1e7);
  const CovMatrix k = fair_cov_matrix(rasterize_all(polys, grid, 4), flat, grid);
  CHECK(k.values.rows() == 4);
  CHECK((k.values.array() - 3.0).abs().maxCoeff() < 1e-9);
  CHECK(k.method == CovMethod::kFair);
  CHECK(k.resolution == 64);
}

TEST_CASE("FAIR equals the circular spatial double sum") {
  const auto m = CovarianceKernel::matern(1.0, 0.5, 1.5);
  const std::vector<Polygon> polys = seeded_polygons(5, 21, 1.5);
  const RegularGrid grid = build_grid(polys, m, 64);
  const RealField c_circ = sample_kernel_circular(m, grid);
  for (int ss : {1, 4}) {
    const auto fields = rasterize_all(polys, grid, ss);
    const CovMatrix k = fair_cov_matrix(fields, m, grid);
    CHECK(max_rel_entry(k.values, circular_double_sum(fields, c_circ, grid)) < 1e-10);
    CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  const CovMatrix fair_binary = fair_cov_matrix(rasterize_all(polys, grid, 1), m, grid);
  const CovMatrix riemann =
      riemann_cov_matrix_circular(riemann_point_sets(polys, grid), c_circ, m, grid);
  CHECK(max_rel_entry(fair_binary.values, riemann.values) < 1e-10);
}

TEST_CASE("full-spectrum sum has a negligible imaginary part and matches the engine") {
  const auto m = CovarianceKernel::matern(1.3, 0.5, 1.5);
  const std::vector<Polygon> polys = seeded_polygons(4, 5, 1.5);
  const RegularGrid grid = build_grid(polys, m, 32);
  const auto fields = rasterize_all(polys, grid, 4);
  const RealField c_hat = kernel_spectrum(m, grid);
  std::vector<SpectralField> spectra;
  for (const IndicatorField& f : fields) spectra.push_back(dft2(f.to_dense()));
  const CovMatrix k = fair_cov_matrix(fields, m, grid);
  const double n_cells = static_cast<double>(grid.size());
  const double da = grid.cell_area();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      std::complex<double> total = 0.0;
      for (std::size_t q = 0; q < c_hat.size(); ++q) {
        total += spectra[i].values()[q] * std::conj(spectra[j].values()[q]) * c_hat.values()[q];
      }
      total *= da * da / (n_cells * fields[i].discrete_area() * fields[j].discrete_area());
      CHECK(std::abs(total.imag()) < 1e-10 * m.sigma2());
      CHECK(test::rel_diff(total.real(), k.values(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j))) < 1e-12);
    }
  }
}

TEST_CASE("offset unit squares at 2^10 match the ground truth") {
  const auto g = CovarianceKernel::gaussian();
  const std::vector<Polygon> polys{square(0, 0), square(0.3, 0.3)};
  const RegularGrid grid = build_grid(polys, g, 1024);
  const CovMatrix k = fair_cov_matrix(rasterize_all(polys, grid, 4), g, grid);
  const double corr = k.values(0, 1) / std::sqrt(k.values(0, 0) * k.values(1, 1));
  CHECK(std::abs(corr - 0.926231) < 5e-3);
}

TEST_CASE("engine rejects fields on different grids") {
  const RegularGrid a = RegularGrid::square({0, 0}, 4.0, 32);
  const RegularGrid b = RegularGrid::square({0, 0}, 4.0, 64);
  std::vector<IndicatorField> fields{rasterize_fractional(square(0, 0), a),
                                     rasterize_fractional(square(0, 0), b)};
  CHECK_THROWS_AS(FairEngine(std::move(fields)), ConfigError);
  CHECK_THROWS_AS(FairEngine(std::vector<IndicatorField>{}), ConfigError);
}

TEST_CASE("prediction with zero weights returns the mean field") {
  const auto m = CovarianceKernel::matern(1.0, 0.5, 1.5);
  const std::vector<Polygon> polys = seeded_polygons(3, 5, 1.0);
  const RegularGrid grid = build_grid(polys, m, 64);
  RealField mean(64, 64);
  for (std::size_t i = 0; i < mean.size(); ++i) mean.values()[i] = 0.01 * static_cast<double>(i);
  const RealField out =
      predict_surface(rasterize_all(polys, grid, 4), Eigen::VectorXd::Zero(3), m, grid, mean);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    CHECK(out.values()[i] == doctest::Approx(mean.values()[i]).epsilon(1e-12));
  }
}

TEST_CASE("single-region prediction matches a direct circular convolution") {
  const auto m = CovarianceKernel::matern(1.5, 0.7, 1.5);
  const std::vector<Polygon> polys = seeded_polygons(1, 9, 1.0);
  const RegularGrid grid = build_grid(polys, m, 32);
  const auto fields = rasterize_all(polys, grid, 4);
  const RealField c_circ = sample_kernel_circular(m, grid);
  const RealField mean(32, 32, 0.25);
  Eigen::VectorXd beta(1);
  beta << 1.0;
  const RealField out = predict_surface(fields, beta, m, grid, mean);
  const IndicatorField& f = fields[0];
  const double area = f.discrete_area();
  for (int uy = 0; uy < 32; ++uy) {
    for (int ux = 0; ux < 32; ++ux) {
      double conv = 0.0;
      for (auto [kx, ky] : f.support()) {
        conv += f(kx, ky) * c_circ(((ux - kx) % 32 + 32) % 32, ((uy - ky) % 32 + 32) % 32);
      }
      const double expected = conv * grid.cell_area() / area + 0.25;
      CHECK(test::rel_diff(out(ux, uy), expected) < 1e-10);
    }
  }
}

TEST_CASE("prediction is linear in the weights") {
  const auto m = CovarianceKernel::matern(1.0, 0.5, 1.5);
  const std::vector<Polygon> polys{random_polygon(1, {0, 0}, {}), random_polygon(2, {0.4, 0.3}, {})};
  const RegularGrid grid = build_grid(polys, m, 64);
  const auto fields = rasterize_all(polys, grid, 4);
  const RealField zero(64, 64, 0.0);
  Eigen::VectorXd e1(2), e2(2), mix(2);
  e1 << 1, 0;
  e2 << 0, 1;
  mix << 2.0, -0.5;
  const RealField a = predict_surface(fields, e1, m, grid, zero);
  const RealField b = predict_surface(fields, e2, m, grid, zero);
  const RealField c = predict_surface(fields, mix, m, grid, zero);
  double scale = 0.0;
  for (double v : c.values()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(std::abs(c.values()[i] - (2.0 * a.values()[i] - 0.5 * b.values()[i])) < 1e-12 * scale);
  }
}

}  // TEST_SUITE
