#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fair/covmatrix.hpp"
#include "fair/fourier.hpp"
#include "fair/geometry.hpp"
#include "fair/quadrature.hpp"

namespace fair {

/// Observed regional values Z with prior means mu and nugget variance tau2.
struct ObservationSet {
  std::vector<std::string> ids;
  Eigen::VectorXd z;
  Eigen::VectorXd mu;
  double tau2 = 0.0;

  Eigen::Index size() const noexcept { return z.size(); }
  Eigen::VectorXd residual() const { return z - mu; }
  /// Throws ConfigError when lengths disagree or tau2 < 0. Empty ids are allowed.
  void validate() const;
};

/// mu_i = sum_k I_i[k] mean_fn[k] dA / |B_i|.
Eigen::VectorXd region_means(std::span<const IndicatorField> fields, const RealField& mean_fn);

/// 0.5 r'(K + tau2 I)^-1 r + 0.5 log|K + tau2 I| + (n/2) log(2 pi), r = Z - mu.
/// Throws NotPositiveDefinite carrying K + tau2 I when the Cholesky fails.
double neg_log_lik(const Eigen::MatrixXd& k, const ObservationSet& obs);

/// beta = (K + tau2 I)^-1 (Z - mu).
Eigen::VectorXd kriging_weights(const Eigen::MatrixXd& k, const ObservationSet& obs);

/// Symmetrize, then clip eigenvalues below 1e-10 * lambda_max up to that
/// floor. Inputs whose smallest eigenvalue already exceeds the floor come
/// back as their symmetrized selves.
Eigen::MatrixXd nearest_pd(const Eigen::MatrixXd& k);

/// (1/n) sqrt(sum (A_ij - B_ij)^2).
double rmsed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// max |A_ij - B_ij|.
double maed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// 0.5 (tr(A^-1 B) - n + log(det A / det B)).
double kl_div(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Draws Z ~ N(0, K + tau2 I) from a seeded generator.
Eigen::VectorXd simulate_observations(const Eigen::MatrixXd& k, double tau2, std::uint64_t seed);

/// Unit-variance regional covariance as a function of range, with the
/// expensive geometry (region transforms or quadrature nodes) fixed.
class CovarianceModel {
 public:
  CovarianceModel(FairEngine engine, CovarianceKernel base);
  CovarianceModel(RiemannEngine engine, CovarianceKernel base);

  CovMethod method() const noexcept;
  const CovarianceKernel& base_kernel() const noexcept { return base_; }
  const RegularGrid& grid() const noexcept;
  const FairEngine* fair_engine() const noexcept { return std::get_if<FairEngine>(&engine_); }
  const RiemannEngine* riemann_engine() const noexcept {
    return std::get_if<RiemannEngine>(&engine_);
  }

  /// K_1(theta): the base kernel with sigma2 = 1 and range theta.
  Eigen::MatrixXd unit_covariance(double theta) const;

 private:
  std::variant<FairEngine, RiemannEngine> engine_;
  CovarianceKernel base_;
};

struct MleCandidate {
  double theta;
  double ratio;  ///< tau2 / sigma2
};

/// n_theta x n_ratio candidates, both axes log-spaced over closed intervals.
std::vector<MleCandidate> log_spaced_candidates(double theta_lo, double theta_hi, int n_theta,
                                                double ratio_lo, double ratio_hi, int n_ratio);

struct MleResult {
  std::vector<MleCandidate> candidates;
  std::vector<double> nll;          ///< +inf for failed candidates
  std::vector<double> sigma2_hat;   ///< profiled marginal variance per candidate
  std::vector<double> seconds;      ///< wall time attributed to each candidate
  std::vector<bool> pd_repaired;
  std::vector<bool> failed;
  std::vector<std::string> diagnostics;
  std::size_t best_index = 0;

  const MleCandidate& best() const { return candidates.at(best_index); }
  double best_sigma2() const { return sigma2_hat.at(best_index); }
  double best_tau2() const { return best().ratio * best_sigma2(); }
};

/// Profiled negative log likelihood over a candidate grid. For each range
/// the unit covariance K_1 is built once; per ratio, sigma2_hat =
/// r'(K_1 + ratio I)^-1 r / n and tau2 = ratio * sigma2_hat. A failed
/// Cholesky triggers nearest_pd(K_1) and flags the candidate.
MleResult mle_grid_search(std::span<const MleCandidate> candidates, const CovarianceModel& model,
                          const Eigen::VectorXd& residual);

}  // namespace fair
