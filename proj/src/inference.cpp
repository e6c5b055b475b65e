#include "fair/inference.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "fair/errors.hpp"

namespace fair {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ConfigError("matrix comparison needs two square matrices of equal size");
  }
}

void require_matching(const Eigen::MatrixXd& k, const ObservationSet& obs) {
  obs.validate();
  if (k.rows() != k.cols() || k.rows() != obs.size()) {
    throw ConfigError("covariance matrix is " + std::to_string(k.rows()) + "x" +
                      std::to_string(k.cols()) + " for " + std::to_string(obs.size()) +
                      " observations");
  }
}

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(what, m);
  return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void ObservationSet::validate() const {
  if (z.size() != mu.size()) throw ConfigError("observation values and means differ in length");
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != z.size()) {
    throw ConfigError("observation ids and values differ in length");
  }
  if (!(tau2 >= 0.0)) throw ConfigError("nugget variance tau2 must be >= 0");
}

Eigen::VectorXd region_means(std::span<const IndicatorField> fields, const RealField& mean_fn) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const IndicatorField& f = fields[i];
    if (mean_fn.nx() != f.grid().nx() || mean_fn.ny() != f.grid().ny()) {
      throw ConfigError("mean field does not match the indicator grid");
    }
    const double area = f.discrete_area();
    if (!(area > 0.0)) throw ConfigError("region " + std::to_string(i) + " has zero discrete area");
    double sum = 0.0;
    for (int ly = 0; ly < f.height(); ++ly) {
      for (int lx = 0; lx < f.width(); ++lx) {
        sum += f.window_values()[static_cast<std::size_t>(ly) * f.width() + lx] *
               mean_fn(f.ix0() + lx, f.iy0() + ly);
      }
    }
    mu[static_cast<Eigen::Index>(i)] = sum * f.grid().cell_area() / area;
  }
  return mu;
}

double neg_log_lik(const Eigen::MatrixXd& k, const ObservationSet& obs) {
  require_matching(k, obs);
  const Eigen::Index n = obs.size();
  Eigen::MatrixXd system = k;
  system.diagonal().array() += obs.tau2;
  const auto llt = factor_or_throw(system, "K + tau2 I is not positive definite");
  const Eigen::VectorXd r = obs.residual();
  const Eigen::VectorXd half = llt.matrixL().solve(r);
  return 0.5 * half.squaredNorm() + 0.5 * log_det(llt) + 0.5 * static_cast<double>(n) * kLog2Pi;
}

Eigen::VectorXd kriging_weights(const Eigen::MatrixXd& k, const ObservationSet& obs) {
  require_matching(k, obs);
  Eigen::MatrixXd system = k;
  system.diagonal().array() += obs.tau2;
  const auto llt = factor_or_throw(system, "kriging system K + tau2 I is singular or indefinite");
  return llt.solve(obs.residual());
}

Eigen::MatrixXd nearest_pd(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw ConfigError("nearest_pd needs a square matrix");
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double floor = 1e-10 * lambda.maxCoeff();
  if (!(floor > 0.0)) throw NumericalError("nearest_pd: matrix has no positive eigenvalue");
  if (lambda.minCoeff() > floor) return sym;
  const Eigen::VectorXd clipped = lambda.cwiseMax(floor);
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd out = v * clipped.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

double rmsed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_shape(a, b);
  return (a - b).norm() / static_cast<double>(a.rows());
}

double maed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_shape(a, b);
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

double kl_div(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_same_shape(a, b);
  const auto a_llt = factor_or_throw(a, "KL divergence: first matrix is not positive definite");
  const auto b_llt = factor_or_throw(b, "KL divergence: second matrix is not positive definite");
  const double trace = a_llt.solve(b).trace();
  return 0.5 * (trace - static_cast<double>(a.rows()) + log_det(a_llt) - log_det(b_llt));
}

Eigen::VectorXd simulate_observations(const Eigen::MatrixXd& k, double tau2, std::uint64_t seed) {
  if (!(tau2 >= 0.0)) throw ConfigError("tau2 must be >= 0");
  const auto llt = factor_or_throw(k, "simulation covariance is not positive definite");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = k.rows();
  Eigen::VectorXd latent(n), noise(n);
  for (Eigen::Index i = 0; i < n; ++i) latent[i] = normal(rng);
  for (Eigen::Index i = 0; i < n; ++i) noise[i] = normal(rng);
  return llt.matrixL() * latent + std::sqrt(tau2) * noise;
}

CovarianceModel::CovarianceModel(FairEngine engine, CovarianceKernel base)
    : engine_(std::move(engine)), base_(base) {}

CovarianceModel::CovarianceModel(RiemannEngine engine, CovarianceKernel base)
    : engine_(std::move(engine)), base_(base) {}

CovMethod CovarianceModel::method() const noexcept {
  return std::holds_alternative<FairEngine>(engine_) ? CovMethod::kFair : CovMethod::kRiemann;
}

const RegularGrid& CovarianceModel::grid() const noexcept {
  return std::visit([](const auto& e) -> const RegularGrid& { return e.grid(); }, engine_);
}

Eigen::MatrixXd CovarianceModel::unit_covariance(double theta) const {
  const CovarianceKernel kernel = base_.with_sigma2(1.0).with_theta(theta);
  return std::visit([&](const auto& e) { return e.covariance(kernel).values; }, engine_);
}

std::vector<MleCandidate> log_spaced_candidates(double theta_lo, double theta_hi, int n_theta,
                                                double ratio_lo, double ratio_hi, int n_ratio) {
  if (n_theta < 1 || n_ratio < 1 || !(theta_lo > 0.0) || !(theta_hi >= theta_lo) ||
      !(ratio_lo > 0.0) || !(ratio_hi >= ratio_lo)) {
    throw ConfigError("invalid candidate grid specification");
  }
  const auto axis = [](double lo, double hi, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      v[static_cast<std::size_t>(i)] =
          count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    }
    if (count > 1) v.back() = hi;
    return v;
  };
  std::vector<MleCandidate> out;
  for (double theta : axis(theta_lo, theta_hi, n_theta)) {
    for (double ratio : axis(ratio_lo, ratio_hi, n_ratio)) out.push_back({theta, ratio});
  }
  return out;
}

MleResult mle_grid_search(std::span<const MleCandidate> candidates, const CovarianceModel& model,
                          const Eigen::VectorXd& residual) {
  if (candidates.empty()) throw ConfigError("MLE grid search needs at least one candidate");
  const std::size_t count = candidates.size();
  const Eigen::Index n = residual.size();
  const double inf = std::numeric_limits<double>::infinity();

  MleResult result;
  result.candidates.assign(candidates.begin(), candidates.end());
  result.nll.assign(count, inf);
  result.sigma2_hat.assign(count, 0.0);
  result.seconds.assign(count, 0.0);
  // vector<bool> is not safe for concurrent writes to distinct elements.
  std::vector<char> repaired_flag(count, 0);
  std::vector<char> failed_flag(count, 0);
  result.diagnostics.assign(count, "");

  // Group candidates sharing a range so K_1 is built once per range.
  std::vector<double> thetas;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t g = 0;
    while (g < thetas.size() && thetas[g] != candidates[c].theta) ++g;
    if (g == thetas.size()) {
      thetas.push_back(candidates[c].theta);
      members.emplace_back();
    }
    members[g].push_back(c);
  }

#pragma omp parallel for schedule(dynamic)
  for (long g = 0; g < static_cast<long>(thetas.size()); ++g) {
    const auto& group = members[static_cast<std::size_t>(g)];
    const auto cov_start = std::chrono::steady_clock::now();
    Eigen::MatrixXd k1;
    std::string build_error;
    try {
      k1 = model.unit_covariance(thetas[static_cast<std::size_t>(g)]);
      if (k1.rows() != n) throw ConfigError("covariance size does not match the data");
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    const double cov_share = seconds_since(cov_start) / static_cast<double>(group.size());

    std::optional<Eigen::MatrixXd> repaired;
    for (std::size_t c : group) {
      const auto start = std::chrono::steady_clock::now();
      if (!build_error.empty()) {
        failed_flag[c] = 1;
        result.diagnostics[c] = build_error;
        result.seconds[c] = cov_share;
        continue;
      }
      const double ratio = candidates[c].ratio;
      Eigen::MatrixXd system = k1;
      system.diagonal().array() += ratio;
      Eigen::LLT<Eigen::MatrixXd> llt(system);
      if (llt.info() != Eigen::Success) {
        if (!repaired) {
          try {
            repaired = nearest_pd(k1);
          } catch (const std::exception& e) {
            repaired = Eigen::MatrixXd();
            result.diagnostics[c] = e.what();
          }
        }
        repaired_flag[c] = 1;
        if (repaired->rows() == n) {
          system = *repaired;
          system.diagonal().array() += ratio;
          llt.compute(system);
        }
      }
      if (llt.info() != Eigen::Success) {
        failed_flag[c] = 1;
        if (result.diagnostics[c].empty()) {
          result.diagnostics[c] = "K_1 + ratio I not positive definite even after repair";
        }
      } else {
        const Eigen::VectorXd half = llt.matrixL().solve(residual);
        const double quad = half.squaredNorm();
        const double nd = static_cast<double>(n);
        const double sigma2 = std::max(quad / nd, std::numeric_limits<double>::min());
        result.sigma2_hat[c] = sigma2;
        result.nll[c] = 0.5 * nd + 0.5 * nd * std::log(sigma2) + 0.5 * log_det(llt) +
                        0.5 * nd * kLog2Pi;
      }
      result.seconds[c] = cov_share + seconds_since(start);
    }
  }

  result.pd_repaired.assign(repaired_flag.begin(), repaired_flag.end());
  result.failed.assign(failed_flag.begin(), failed_flag.end());
  std::size_t best = count;
  for (std::size_t c = 0; c < count; ++c) {
    if (result.failed[c]) continue;
    if (best == count || result.nll[c] < result.nll[best]) best = c;
  }
  if (best == count) {
    std::ostringstream msg;
    msg << "all " << count << " MLE candidates failed:";
    for (std::size_t c = 0; c < count; ++c) {
      msg << "\n  theta=" << candidates[c].theta << " ratio=" << candidates[c].ratio << ": "
          << result.diagnostics[c];
    }
    throw NumericalError(msg.str());
  }
  result.best_index = best;
  return result;
}

}  // namespace fair
