#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fair/covmatrix.hpp"
#include "fair/geometry.hpp"
#include "fair/inference.hpp"
#include "fair/io.hpp"
#include "fair/kernels.hpp"

// Study drivers and the compute/estimate/predict pipeline behind the CLI.
// Every config round-trips through JSON so reports can echo the resolved
// settings, defaults included.
namespace fair::studies {

using nlohmann::json;

enum class ExtentMode { kDefault, kExtended };

// ---- accuracy study: two unit squares, Gaussian kernel, closed-form truth ----

struct AccuracyConfig {
  CovarianceKernel kernel = CovarianceKernel::gaussian();
  std::vector<double> deltas{0.3, 0.9, 1.5, 2.1, 2.7};
  int min_power = 3;
  int max_power = 11;
  ExtentMode extent_mode = ExtentMode::kDefault;
  int supersample = kDefaultSupersample;

  json to_json() const;
  static AccuracyConfig from_json(const json& doc);
};

struct AccuracyRow {
  double delta;
  int resolution;
  double extent;
  double fair_corr;
  double truth_corr;
  double abs_error;
};

/// Closed-form correlation between [0,1]^2 and [delta, 1+delta]^2 for a
/// Gaussian kernel of any range.
double accuracy_truth(const CovarianceKernel& kernel, double delta);
AccuracyRow accuracy_point(const CovarianceKernel& kernel, double delta, int resolution,
                           ExtentMode mode, int supersample = kDefaultSupersample);
std::vector<AccuracyRow> run_accuracy_study(const AccuracyConfig& config);
void write_accuracy_csv(std::ostream& out, std::span<const AccuracyRow> rows);

// ---- consistency study: random polygons, FAIR vs direct Riemann ----

struct ConsistencyConfig {
  int polygons = 100;
  std::uint64_t seed = 2021;
  CovarianceKernel kernel = CovarianceKernel::matern(1.0, 0.5, 1.5);
  std::vector<int> resolutions{128, 256, 512, 1024};
  double domain_half_width = 12.5;
  double center_half_width = 10.0;
  double radius_min = 0.5;
  double radius_max = 1.2;
  double irregularity = 0.35;
  int min_vertices = 3;
  int max_vertices = 12;
  int supersample = kDefaultSupersample;
  /// Timed runs per method and resolution; the minimum is reported.
  int timing_repeats = 1;
  bool record_timing = true;

  json to_json() const;
  static ConsistencyConfig from_json(const json& doc);
};

struct ConsistencyRow {
  int resolution;
  double dx;
  double rmsed;
  double maed;
  double kl;
  double time_fair;
  double time_direct;
};

/// Both methods at one resolution compared with direct at the highest.
struct HighResRow {
  int resolution;
  double rmsed_fair;
  double rmsed_direct;
  double maed_fair;
  double maed_direct;
  double kl_fair;
  double kl_direct;
};

struct ConsistencyReport {
  ConsistencyConfig config;
  std::vector<ConsistencyRow> rows;
  std::vector<HighResRow> high_res;
};

std::vector<Polygon> study_polygons(const ConsistencyConfig& config);
RegularGrid study_grid(const ConsistencyConfig& config, int resolution);
ConsistencyReport run_consistency_study(const ConsistencyConfig& config);
void write_consistency_csv(std::ostream& out, const ConsistencyReport& report);
void write_high_res_csv(std::ostream& out, const ConsistencyReport& report);

// ---- compute-cov ----

struct ComputeCovConfig {
  CovMethod method = CovMethod::kFair;
  int resolution = 1024;
  CovarianceKernel kernel = CovarianceKernel::matern(1.0, 0.5, 1.5);
  int supersample = kDefaultSupersample;
  int density = 6;
  double extra_extent = 0.0;

  json to_json() const;
  static ComputeCovConfig from_json(const json& doc);
};

struct ComputeCovResult {
  CovMatrix cov;
  std::optional<RegularGrid> grid;
  std::vector<std::size_t> point_counts;
  double seconds;
};

ComputeCovResult run_compute_cov(std::span<const io::Region> regions,
                                 const ComputeCovConfig& config);

// ---- estimate / predict ----

struct EstimateConfig {
  CovMethod method = CovMethod::kFair;
  int resolution = 1024;
  /// Family and smoothness are fixed; sigma2 and theta are estimated.
  CovarianceKernel kernel = CovarianceKernel::matern(1.0, 0.5, 1.5);
  double theta_min = 0.0625;
  double theta_max = 0.5;
  int theta_count = 9;
  double ratio_min = 0.005;
  double ratio_max = 2.0;
  int ratio_count = 45;
  int supersample = kDefaultSupersample;

  std::vector<MleCandidate> candidates() const;
  json to_json() const;
  static EstimateConfig from_json(const json& doc);
};

struct PhaseTimes {
  double setup = 0.0;
  double precompute = 0.0;
  double search = 0.0;
  double total() const { return setup + precompute + search; }
};

struct EstimateReport {
  EstimateConfig config;
  std::vector<std::string> ids;
  RegularGrid grid;
  double data_mean;
  double data_sd;
  MleResult mle;
  PhaseTimes times;
  std::vector<std::size_t> point_counts;
  std::vector<std::string> warnings;

  json to_json() const;
};

inline constexpr const char* kInsufficientData = "insufficient_data";

/// Normalizes region values to zero mean and unit sample standard deviation,
/// builds one grid from the largest candidate range, precomputes region
/// transforms (fair) or quadrature nodes (riemann), then grid-searches.
EstimateReport run_estimate(std::span<const io::Region> regions, const EstimateConfig& config);

struct PredictionResult {
  RegularGrid grid;
  RealField surface;
  Eigen::VectorXd beta;
  double setup_seconds;
  double predict_seconds;
  bool pd_repaired;
};

/// Kriging surface on the estimation grid from a saved EstimateReport.
/// A requested resolution different from the saved grid is an error.
PredictionResult run_predict(std::span<const io::Region> regions, const json& estimate,
                             std::optional<int> resolution = std::nullopt);

/// Values of all regions, or ConfigError listing the ids without one.
Eigen::VectorXd region_values(std::span<const io::Region> regions);

}  // namespace fair::studies
