#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fair {

/// Bad input or configuration: invalid geometry, parameters, or files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a covariance system is not positive definite. Carries the
/// offending matrix so the caller can repair it (see nearest_pd) and retry.
class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(const std::string& what, Eigen::MatrixXd matrix)
      : NumericalError(what), matrix_(std::move(matrix)) {}

  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

}  // namespace fair
