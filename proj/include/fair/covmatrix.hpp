#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "fair/kernels.hpp"

namespace fair {

enum class CovMethod { kFair, kRiemann, kJh };

std::string_view to_string(CovMethod method) noexcept;
CovMethod parse_cov_method(std::string_view name);

/// Regional covariance matrix with its provenance. `resolution` is the grid
/// cells per axis for fair/riemann and the per-axis point density for jh.
struct CovMatrix {
  Eigen::MatrixXd values;
  CovMethod method;
  int resolution;
  CovarianceKernel kernel;
};

}  // namespace fair
