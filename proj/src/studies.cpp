#include "fair/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "fair/errors.hpp"
#include "fair/fourier.hpp"
#include "fair/quadrature.hpp"

namespace fair::studies {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T>
void read_if(const json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void require_object(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
}

std::string_view to_string(ExtentMode mode) {
  return mode == ExtentMode::kExtended ? "extended" : "default";
}

ExtentMode parse_extent_mode(const std::string& name) {
  if (name == "default") return ExtentMode::kDefault;
  if (name == "extended") return ExtentMode::kExtended;
  throw ConfigError("extent mode must be 'default' or 'extended', got '" + name + "'");
}

CovMethod read_method(const json& doc, CovMethod fallback) {
  if (!doc.contains("method")) return fallback;
  return parse_cov_method(doc["method"].get<std::string>());
}

CovarianceKernel read_kernel(const json& doc, const CovarianceKernel& fallback) {
  return doc.contains("kernel") ? io::kernel_from_json(doc["kernel"], fallback) : fallback;
}

Polygon axis_square(double x0, double y0, double side) {
  return Polygon({{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}});
}

std::string sci(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream out;
  out << std::scientific << std::setprecision(6) << v;
  return out.str();
}

std::string fixed3(double v, bool enabled) {
  if (!enabled || std::isnan(v)) return "NA";
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

double kl_or_nan(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  try {
    return kl_div(a, b);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

// ---------------------------------------------------------------- accuracy

json AccuracyConfig::to_json() const {
  return json{{"kernel", io::kernel_to_json(kernel)}, {"deltas", deltas},
              {"min_power", min_power},
              {"max_power", max_power},
              {"extent_mode", to_string(extent_mode)}, {"supersample", supersample}};
}

AccuracyConfig AccuracyConfig::from_json(const json& doc) {
  require_object(doc);
  AccuracyConfig c;
  c.kernel = read_kernel(doc, c.kernel);
  read_if(doc, "deltas", c.deltas);
  read_if(doc, "min_power", c.min_power);
  read_if(doc, "max_power", c.max_power);
  read_if(doc, "supersample", c.supersample);
  if (doc.contains("extent_mode")) c.extent_mode = parse_extent_mode(doc["extent_mode"].get<std::string>());
  return c;
}

double accuracy_truth(const CovarianceKernel& kernel, double delta) {
  if (kernel.family() != KernelFamily::kGaussian) {
    throw ConfigError("the accuracy study needs a gaussian kernel (closed-form truth)");
  }
  const double s = 1.0 / kernel.theta();
  return gaussian_rect_corr({0.0, s, 0.0, s}, {delta * s, (1.0 + delta) * s, delta * s, (1.0 + delta) * s});
}

AccuracyRow accuracy_point(const CovarianceKernel& kernel, double delta, int resolution,
                           ExtentMode mode, int supersample) {
  const std::vector<Polygon> regions{axis_square(0.0, 0.0, 1.0), axis_square(delta, delta, 1.0)};
  const double extra = mode == ExtentMode::kExtended ? 1.0 : 0.0;
  const RegularGrid grid = build_grid(regions, kernel, resolution, extra);
  std::vector<IndicatorField> fields;
  for (const Polygon& p : regions) fields.push_back(rasterize_fractional(p, grid, supersample));
  const Eigen::MatrixXd k = FairEngine(std::move(fields)).covariance(kernel).values;
  const double fair_corr = k(0, 1) / std::sqrt(k(0, 0) * k(1, 1));
  const double truth = accuracy_truth(kernel, delta);
  return {delta, resolution, grid.extent_x(), fair_corr, truth, std::abs(fair_corr - truth)};
}

std::vector<AccuracyRow> run_accuracy_study(const AccuracyConfig& config) {
  if (config.min_power < 3 || config.max_power < config.min_power || config.max_power > 14) {
    throw ConfigError("accuracy study powers must satisfy 3 <= min_power <= max_power <= 14");
  }
  if (config.deltas.empty()) throw ConfigError("accuracy study needs at least one offset");
  std::vector<AccuracyRow> rows;
  for (double delta : config.deltas) {
    if (!(delta > 0.0)) throw ConfigError("offsets must be positive");
    for (int p = config.min_power; p <= config.max_power; ++p) {
      rows.push_back(accuracy_point(config.kernel, delta, 1 << p, config.extent_mode, config.supersample));
    }
  }
  return rows;
}

void write_accuracy_csv(std::ostream& out, std::span<const AccuracyRow> rows) {
  out << "delta,resolution,extent,fair_corr,truth_corr,abs_error\n";
  out << std::setprecision(10);
  for (const AccuracyRow& r : rows) {
    out << r.delta << ',' << r.resolution << ',' << r.extent << ',' << r.fair_corr << ','
        << r.truth_corr << ',' << sci(r.abs_error) << '\n';
  }
}

// ------------------------------------------------------------- consistency

json ConsistencyConfig::to_json() const {
  return json{{"polygons", polygons},
              {"seed", seed},
              {"kernel", io::kernel_to_json(kernel)},
              {"resolutions", resolutions},
              {"domain_half_width", domain_half_width},
              {"center_half_width", center_half_width},
              {"radius_min", radius_min},
              {"radius_max", radius_max},
              {"irregularity", irregularity},
              {"min_vertices", min_vertices},
              {"max_vertices", max_vertices},
              {"supersample", supersample},
              {"timing_repeats", timing_repeats},
              {"record_timing", record_timing}};
}

ConsistencyConfig ConsistencyConfig::from_json(const json& doc) {
  require_object(doc);
  ConsistencyConfig c;
  read_if(doc, "polygons", c.polygons);
  read_if(doc, "seed", c.seed);
  c.kernel = read_kernel(doc, c.kernel);
  read_if(doc, "resolutions", c.resolutions);
  read_if(doc, "domain_half_width", c.domain_half_width);
  read_if(doc, "center_half_width", c.center_half_width);
  read_if(doc, "radius_min", c.radius_min);
  read_if(doc, "radius_max", c.radius_max);
  read_if(doc, "irregularity", c.irregularity);
  read_if(doc, "min_vertices", c.min_vertices);
  read_if(doc, "max_vertices", c.max_vertices);
  read_if(doc, "supersample", c.supersample);
  read_if(doc, "timing_repeats", c.timing_repeats);
  read_if(doc, "record_timing", c.record_timing);
  for (int r : c.resolutions) {
    if (r < 8 || !is_power_of_two(r)) {
      throw ConfigError("resolution " + std::to_string(r) + " is not a power of two >= 8");
    }
  }
  if (c.timing_repeats < 1) throw ConfigError("timing_repeats must be >= 1");
  return c;
}

std::vector<Polygon> study_polygons(const ConsistencyConfig& config) {
  if (config.polygons < 1) throw ConfigError("consistency study needs at least one polygon");
  if (!(config.radius_min > 0.0) || config.radius_max < config.radius_min) {
    throw ConfigError("polygon radius range must satisfy 0 < radius_min <= radius_max");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> center(-config.center_half_width, config.center_half_width);
  std::uniform_real_distribution<double> radius(config.radius_min, config.radius_max);
  std::vector<Polygon> out;
  out.reserve(static_cast<std::size_t>(config.polygons));
  for (int i = 0; i < config.polygons; ++i) {
    const Point c{center(rng), center(rng)};
    RandomPolygonParams params;
    params.min_vertices = config.min_vertices;
    params.max_vertices = config.max_vertices;
    params.mean_radius = radius(rng);
    params.irregularity = config.irregularity;
    out.push_back(random_polygon(rng(), c, params));
  }
  return out;
}

RegularGrid study_grid(const ConsistencyConfig& config, int resolution) {
  return RegularGrid::square({0.0, 0.0}, 2.0 * config.domain_half_width, resolution);
}

ConsistencyReport run_consistency_study(const ConsistencyConfig& config) {
  if (config.resolutions.empty()) throw ConfigError("consistency study needs resolutions");
  if (config.timing_repeats < 1) throw ConfigError("timing_repeats must be >= 1");
  const std::vector<Polygon> polygons = study_polygons(config);

  ConsistencyReport report{config, {}, {}};
  std::vector<Eigen::MatrixXd> fair_mats, direct_mats;
  for (int resolution : config.resolutions) {
    const RegularGrid grid = study_grid(config, resolution);

    double time_fair = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd fair;
    for (int rep = 0; rep < config.timing_repeats; ++rep) {
      const auto start = Clock::now();
      std::vector<IndicatorField> fields;
      fields.reserve(polygons.size());
      for (const Polygon& p : polygons) fields.push_back(rasterize_fractional(p, grid, config.supersample));
      fair = FairEngine(std::move(fields)).covariance(config.kernel).values;
      time_fair = std::min(time_fair, seconds_since(start));
    }

    double time_direct = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd direct;
    for (int rep = 0; rep < config.timing_repeats; ++rep) {
      const auto start = Clock::now();
      direct = riemann_cov_matrix(polygons, config.kernel, grid).values;
      time_direct = std::min(time_direct, seconds_since(start));
    }

    report.rows.push_back({resolution, grid.dx(), rmsed(fair, direct), maed(fair, direct),
                           kl_or_nan(fair, direct), time_fair, time_direct});
    fair_mats.push_back(std::move(fair));
    direct_mats.push_back(std::move(direct));
  }

  const std::size_t top = static_cast<std::size_t>(
      std::max_element(config.resolutions.begin(), config.resolutions.end()) -
      config.resolutions.begin());
  const Eigen::MatrixXd& hr = direct_mats[top];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t r = 0; r < config.resolutions.size(); ++r) {
    const bool is_top = r == top;
    report.high_res.push_back({config.resolutions[r], rmsed(fair_mats[r], hr),
                               is_top ? nan : rmsed(direct_mats[r], hr), maed(fair_mats[r], hr),
                               is_top ? nan : maed(direct_mats[r], hr),
                               kl_or_nan(fair_mats[r], hr),
                               is_top ? nan : kl_or_nan(direct_mats[r], hr)});
  }
  return report;
}

void write_consistency_csv(std::ostream& out, const ConsistencyReport& report) {
  const bool timing = report.config.record_timing;
  out << "resolution,dx,rmsed,maed,kl,time_fair,time_direct\n";
  for (const ConsistencyRow& r : report.rows) {
    out << r.resolution << ',' << std::fixed << std::setprecision(6) << r.dx << std::defaultfloat
        << ',' << sci(r.rmsed) << ',' << sci(r.maed) << ',' << sci(r.kl) << ','
        << fixed3(r.time_fair, timing) << ',' << fixed3(r.time_direct, timing) << '\n';
  }
}

void write_high_res_csv(std::ostream& out, const ConsistencyReport& report) {
  out << "resolution,rmsed_fair_hr,rmsed_direct_hr,maed_fair_hr,maed_direct_hr,kl_fair_hr,"
         "kl_direct_hr\n";
  for (const HighResRow& r : report.high_res) {
    out << r.resolution << ',' << sci(r.rmsed_fair) << ',' << sci(r.rmsed_direct) << ','
        << sci(r.maed_fair) << ',' << sci(r.maed_direct) << ',' << sci(r.kl_fair) << ','
        << sci(r.kl_direct) << '\n';
  }
}

// ------------------------------------------------------------- compute-cov

json ComputeCovConfig::to_json() const {
  return json{{"method", to_string(method)},         {"resolution", resolution},
              {"kernel", io::kernel_to_json(kernel)}, {"supersample", supersample},
              {"density", density},                   {"extra_extent", extra_extent}};
}

ComputeCovConfig ComputeCovConfig::from_json(const json& doc) {
  require_object(doc);
  ComputeCovConfig c;
  c.method = read_method(doc, c.method);
  read_if(doc, "resolution", c.resolution);
  c.kernel = read_kernel(doc, c.kernel);
  read_if(doc, "supersample", c.supersample);
  read_if(doc, "density", c.density);
  read_if(doc, "extra_extent", c.extra_extent);
  return c;
}

ComputeCovResult run_compute_cov(std::span<const io::Region> regions,
                                 const ComputeCovConfig& config) {
  if (regions.empty()) throw ConfigError("no regions given");
  const std::vector<Polygon> polygons = io::polygons_of(regions);
  const auto start = Clock::now();
  switch (config.method) {
    case CovMethod::kJh: {
      CovMatrix cov = jh_cov_matrix(polygons, config.kernel, config.density);
      std::vector<std::size_t> counts;
      for (const Polygon& p : polygons) counts.push_back(jh_point_set(p, config.density).points.size());
      return {std::move(cov), std::nullopt, std::move(counts), seconds_since(start)};
    }
    case CovMethod::kRiemann: {
      const RegularGrid grid = build_grid(polygons, config.kernel, config.resolution, config.extra_extent);
      const RiemannEngine engine(polygons, grid);
      CovMatrix cov = engine.covariance(config.kernel);
      std::vector<std::size_t> counts;
      for (const PointSet& s : engine.point_sets()) counts.push_back(s.points.size());
      return {std::move(cov), grid, std::move(counts), seconds_since(start)};
    }
    case CovMethod::kFair: break;
  }
  const RegularGrid grid = build_grid(polygons, config.kernel, config.resolution, config.extra_extent);
  std::vector<IndicatorField> fields;
  std::vector<std::size_t> counts;
  for (const Polygon& p : polygons) {
    fields.push_back(rasterize_fractional(p, grid, config.supersample));
    counts.push_back(fields.back().support().size());
  }
  CovMatrix cov = fair_cov_matrix(std::move(fields), config.kernel, grid);
  return {std::move(cov), grid, std::move(counts), seconds_since(start)};
}

// ---------------------------------------------------------------- estimate

std::vector<MleCandidate> EstimateConfig::candidates() const {
  return log_spaced_candidates(theta_min, theta_max, theta_count, ratio_min, ratio_max, ratio_count);
}

json EstimateConfig::to_json() const {
  return json{{"method", to_string(method)},
              {"resolution", resolution},
              {"kernel", io::kernel_to_json(kernel)},
              {"theta_min", theta_min},
              {"theta_max", theta_max},
              {"theta_count", theta_count},
              {"ratio_min", ratio_min},
              {"ratio_max", ratio_max},
              {"ratio_count", ratio_count},
              {"supersample", supersample}};
}

EstimateConfig EstimateConfig::from_json(const json& doc) {
  require_object(doc);
  EstimateConfig c;
  c.method = read_method(doc, c.method);
  if (c.method == CovMethod::kJh) throw ConfigError("estimation supports methods fair and riemann");
  read_if(doc, "resolution", c.resolution);
  c.kernel = read_kernel(doc, c.kernel);
  read_if(doc, "theta_min", c.theta_min);
  read_if(doc, "theta_max", c.theta_max);
  read_if(doc, "theta_count", c.theta_count);
  read_if(doc, "ratio_min", c.ratio_min);
  read_if(doc, "ratio_max", c.ratio_max);
  read_if(doc, "ratio_count", c.ratio_count);
  read_if(doc, "supersample", c.supersample);
  return c;
}

json EstimateReport::to_json() const {
  json candidates = json::array();
  for (std::size_t c = 0; c < mle.candidates.size(); ++c) {
    json item{{"theta", mle.candidates[c].theta},
              {"ratio", mle.candidates[c].ratio},
              {"nll", mle.failed[c] ? json(nullptr) : json(mle.nll[c])},
              {"sigma2_hat", mle.sigma2_hat[c]},
              {"seconds", mle.seconds[c]},
              {"pd_repaired", static_cast<bool>(mle.pd_repaired[c])},
              {"failed", static_cast<bool>(mle.failed[c])}};
    if (!mle.diagnostics[c].empty()) item["diagnostic"] = mle.diagnostics[c];
    candidates.push_back(std::move(item));
  }
  const auto round3 = [](double s) { return std::round(s * 1000.0) / 1000.0; };
  const MleCandidate& best = mle.best();
  return json{{"config", config.to_json()},
              {"ids", ids},
              {"grid", io::grid_to_json(grid)},
              {"normalization", {{"mean", data_mean}, {"sd", data_sd}}},
              {"best",
               {{"theta", best.theta},
                {"ratio", best.ratio},
                {"sigma2", mle.best_sigma2()},
                {"tau2", mle.best_tau2()},
                {"nll", mle.nll[mle.best_index]},
                {"index", mle.best_index}}},
              {"candidates", candidates},
              {"timing",
               {{"setup", round3(times.setup)},
                {"precompute", round3(times.precompute)},
                {"search", round3(times.search)},
                {"total", round3(times.total())}}},
              {"point_counts", point_counts},
              {"warnings", warnings}};
}

Eigen::VectorXd region_values(std::span<const io::Region> regions) {
  std::vector<std::string> missing;
  Eigen::VectorXd values(static_cast<Eigen::Index>(regions.size()));
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].value) {
      values[static_cast<Eigen::Index>(i)] = *regions[i].value;
    } else {
      missing.push_back(regions[i].id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw ConfigError("regions without a value: " + list);
  }
  return values;
}

EstimateReport run_estimate(std::span<const io::Region> regions, const EstimateConfig& config) {
  if (regions.empty()) throw ConfigError("no regions given");
  if (config.method == CovMethod::kJh) throw ConfigError("estimation supports methods fair and riemann");
  const Eigen::VectorXd values = region_values(regions);
  const std::vector<Polygon> polygons = io::polygons_of(regions);
  const std::vector<MleCandidate> candidates = config.candidates();
  const Eigen::Index n = values.size();

  std::vector<std::string> warnings;
  const double mean = values.mean();
  double sd = 1.0;
  if (n < 2) {
    warnings.emplace_back(kInsufficientData);
  } else {
    sd = std::sqrt((values.array() - mean).square().sum() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      warnings.emplace_back("constant_data");
      sd = 1.0;
    }
  }
  const Eigen::VectorXd residual = (values.array() - mean) / sd;

  PhaseTimes times;
  auto start = Clock::now();
  double theta_max = 0.0;
  for (const MleCandidate& c : candidates) theta_max = std::max(theta_max, c.theta);
  const RegularGrid grid =
      build_grid(polygons, config.kernel.with_theta(theta_max), config.resolution);
  times.setup = seconds_since(start);

  start = Clock::now();
  std::vector<std::size_t> counts;
  std::optional<CovarianceModel> model;
  if (config.method == CovMethod::kFair) {
    std::vector<IndicatorField> fields;
    for (const Polygon& p : polygons) {
      fields.push_back(rasterize_fractional(p, grid, config.supersample));
      counts.push_back(fields.back().support().size());
    }
    model.emplace(FairEngine(std::move(fields)), config.kernel);
  } else {
    RiemannEngine engine(polygons, grid);
    for (const PointSet& s : engine.point_sets()) counts.push_back(s.points.size());
    model.emplace(std::move(engine), config.kernel);
  }
  times.precompute = seconds_since(start);

  start = Clock::now();
  MleResult mle = mle_grid_search(candidates, *model, residual);
  times.search = seconds_since(start);

  std::vector<std::string> ids;
  for (const io::Region& r : regions) ids.push_back(r.id);
  return EstimateReport{config, std::move(ids), grid, mean, sd, std::move(mle), times,
                        std::move(counts), std::move(warnings)};
}

// ----------------------------------------------------------------- predict

PredictionResult run_predict(std::span<const io::Region> regions, const json& estimate,
                             std::optional<int> resolution) {
  EstimateConfig config;
  RegularGrid grid = RegularGrid::square({0.0, 0.0}, 1.0, 8);
  double mean = 0.0, sd = 1.0, theta = 0.0, ratio = 0.0, sigma2 = 0.0;
  std::vector<std::string> ids;
  try {
    config = EstimateConfig::from_json(estimate.at("config"));
    grid = io::grid_from_json(estimate.at("grid"));
    mean = estimate.at("normalization").at("mean").get<double>();
    sd = estimate.at("normalization").at("sd").get<double>();
    const json& best = estimate.at("best");
    theta = best.at("theta").get<double>();
    ratio = best.at("ratio").get<double>();
    sigma2 = best.at("sigma2").get<double>();
    ids = estimate.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed estimation result: ") + e.what());
  }
  if (resolution && (*resolution != grid.nx() || *resolution != grid.ny())) {
    throw ConfigError("grid mismatch: estimation used " + std::to_string(grid.nx()) + "x" +
                      std::to_string(grid.ny()) + " cells, prediction requested " +
                      std::to_string(*resolution));
  }
  if (ids.size() != regions.size()) {
    throw ConfigError("estimation covered " + std::to_string(ids.size()) + " regions, got " +
                      std::to_string(regions.size()));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != regions[i].id) {
      throw ConfigError("region id mismatch at position " + std::to_string(i) + ": '" + ids[i] +
                        "' vs '" + regions[i].id + "'");
    }
  }
  const Eigen::VectorXd values = region_values(regions);

  auto start = Clock::now();
  const CovarianceKernel kernel = config.kernel.with_sigma2(sigma2).with_theta(theta);
  std::vector<IndicatorField> fields;
  for (const io::Region& r : regions) {
    fields.push_back(rasterize_fractional(r.polygon, grid, config.supersample));
  }
  const FairEngine engine(std::move(fields));
  const RealField spectrum = kernel_spectrum(kernel, grid);
  Eigen::MatrixXd k = engine.covariance(spectrum, kernel).values;
  const double setup_seconds = seconds_since(start);

  start = Clock::now();
  ObservationSet obs;
  obs.ids = ids;
  obs.z = (values.array() - mean) / sd;
  obs.mu = Eigen::VectorXd::Zero(obs.z.size());
  obs.tau2 = ratio * sigma2;
  Eigen::VectorXd beta;
  bool repaired = false;
  try {
    beta = kriging_weights(k, obs);
  } catch (const NotPositiveDefinite&) {
    repaired = true;
    beta = kriging_weights(nearest_pd(k), obs);
  }
  RealField surface = engine.predict(beta, spectrum, RealField(grid.nx(), grid.ny(), 0.0));
  for (double& v : surface.values()) v = mean + sd * v;
  const double predict_seconds = seconds_since(start);

  return {grid, std::move(surface), std::move(beta), setup_seconds, predict_seconds, repaired};
}

}  // namespace fair::studies
