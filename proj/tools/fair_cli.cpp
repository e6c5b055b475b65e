// Command-line front end: accuracy-study, consistency-study, compute-cov,
// estimate, predict. Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fair/errors.hpp"
#include "fair/io.hpp"
#include "fair/studies.hpp"

namespace {

using fair::io::json;
namespace fs = std::filesystem;
namespace st = fair::studies;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json doc = fair::io::read_json(path);
  if (!doc.is_object()) throw fair::ConfigError("config file must hold a JSON object");
  return doc;
}

template <class T>
void override_field(json& doc, const CLI::Option* opt, const char* key, const T& value) {
  if (opt->count() > 0) doc[key] = value;
}

struct KernelFlags {
  std::string family;
  double sigma2 = 0.0;
  double theta = 0.0;
  double nu = 0.0;
  CLI::Option* family_opt = nullptr;
  CLI::Option* sigma2_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* nu_opt = nullptr;

  void attach(CLI::App* cmd) {
    family_opt = cmd->add_option("--kernel-family", family, "gaussian | matern | exponential");
    sigma2_opt = cmd->add_option("--sigma2", sigma2, "Marginal variance");
    theta_opt = cmd->add_option("--theta", theta, "Range parameter");
    nu_opt = cmd->add_option("--nu", nu, "Matern smoothness");
  }

  void apply(json& doc) const {
    json kernel = doc.contains("kernel") ? doc["kernel"] : json::object();
    override_field(kernel, family_opt, "family", family);
    override_field(kernel, sigma2_opt, "sigma2", sigma2);
    override_field(kernel, theta_opt, "theta", theta);
    override_field(kernel, nu_opt, "nu", nu);
    if (!kernel.empty()) doc["kernel"] = kernel;
  }
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw fair::ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional covariance matrices via Fourier approximation of integrals over regions"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = library default)")
      ->check(CLI::NonNegativeNumber);

  // accuracy-study
  auto* acc = app.add_subcommand("accuracy-study", "Two unit squares under a Gaussian kernel: FAIR vs closed form");
  std::string acc_config, acc_out, acc_extent;
  std::vector<double> acc_deltas;
  int acc_min = 0, acc_max = 0, acc_ss = 0;
  KernelFlags acc_kernel;
  acc->add_option("--config", acc_config, "JSON config file");
  acc->add_option("--out", acc_out, "CSV output (default: stdout)");
  auto* acc_extent_opt = acc->add_option("--extent-mode", acc_extent, "default | extended");
  auto* acc_deltas_opt = acc->add_option("--deltas", acc_deltas, "Offsets")->delimiter(',');
  auto* acc_min_opt = acc->add_option("--min-power", acc_min, "Smallest resolution exponent");
  auto* acc_max_opt = acc->add_option("--max-power", acc_max, "Largest resolution exponent");
  auto* acc_ss_opt = acc->add_option("--supersample", acc_ss, "Sub-cells per axis");
  acc_kernel.attach(acc);

  // consistency-study
  auto* con = app.add_subcommand("consistency-study", "Random polygons: FAIR vs direct Riemann across resolutions");
  std::string con_config, con_out, con_hr_out, con_regions_out;
  std::vector<int> con_res;
  int con_polygons = 0, con_ss = 0, con_repeats = 0;
  std::uint64_t con_seed = 0;
  bool con_no_timing = false;
  KernelFlags con_kernel;
  con->add_option("--config", con_config, "JSON config file");
  con->add_option("--out", con_out, "CSV output (default: stdout)");
  con->add_option("--high-res-out", con_hr_out, "CSV comparing each resolution with direct at the highest");
  con->add_option("--regions-out", con_regions_out, "Write the generated polygons as a regions file");
  auto* con_polygons_opt = con->add_option("--polygons", con_polygons, "Number of random polygons");
  auto* con_seed_opt = con->add_option("--seed", con_seed, "Polygon generator seed");
  auto* con_res_opt = con->add_option("--resolution", con_res, "Grid resolutions")->delimiter(',');
  auto* con_ss_opt = con->add_option("--supersample", con_ss, "Sub-cells per axis");
  auto* con_repeats_opt = con->add_option("--timing-repeats", con_repeats, "Timed runs (minimum reported)");
  con->add_flag("--no-timing", con_no_timing, "Write NA for timings (byte-reproducible report)");
  con_kernel.attach(con);

  // compute-cov
  auto* cov = app.add_subcommand("compute-cov", "Regional covariance matrix for a regions file");
  std::string cov_regions, cov_config, cov_out, cov_method;
  int cov_res = 0, cov_ss = 0, cov_density = 0;
  double cov_extra = 0.0;
  KernelFlags cov_kernel;
  cov->add_option("regions", cov_regions, "Regions JSON")->required();
  cov->add_option("--config", cov_config, "JSON config file");
  cov->add_option("--out", cov_out, "Covariance CSV (sidecar written to <out>.json)")->required();
  auto* cov_method_opt = cov->add_option("--method", cov_method, "fair | riemann | jh");
  auto* cov_res_opt = cov->add_option("--resolution", cov_res, "Grid cells per axis (power of two)");
  auto* cov_ss_opt = cov->add_option("--supersample", cov_ss, "Sub-cells per axis");
  auto* cov_density_opt = cov->add_option("--density", cov_density, "[JH] points per axis");
  auto* cov_extra_opt = cov->add_option("--extra-extent", cov_extra, "Added to the default grid extent");
  cov_kernel.attach(cov);

  // estimate
  auto* est = app.add_subcommand("estimate", "Maximum likelihood grid search over (range, variance ratio)");
  std::string est_regions, est_config, est_out, est_method;
  int est_res = 0, est_ss = 0;
  KernelFlags est_kernel;
  est->add_option("regions", est_regions, "Regions JSON with values")->required();
  est->add_option("--config", est_config, "JSON config file");
  est->add_option("--out", est_out, "Estimation result JSON")->required();
  auto* est_method_opt = est->add_option("--method", est_method, "fair | riemann");
  auto* est_res_opt = est->add_option("--resolution", est_res, "Grid cells per axis (power of two)");
  auto* est_ss_opt = est->add_option("--supersample", est_ss, "Sub-cells per axis");
  est_kernel.attach(est);

  // predict
  auto* pred = app.add_subcommand("predict", "Kriging surface from an estimation result");
  std::string pred_regions, pred_mle, pred_out, pred_format = "csv";
  int pred_res = 0;
  pred->add_option("regions", pred_regions, "Regions JSON with values")->required();
  pred->add_option("mle", pred_mle, "Estimation result JSON")->required();
  pred->add_option("--out", pred_out, "Surface output")->required();
  pred->add_option("--format", pred_format, "csv | binary")->check(CLI::IsMember({"csv", "binary"}));
  auto* pred_res_opt = pred->add_option("--resolution", pred_res, "Expected grid resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*acc) {
      json doc = load_config(acc_config);
      override_field(doc, acc_extent_opt, "extent_mode", acc_extent);
      override_field(doc, acc_deltas_opt, "deltas", acc_deltas);
      override_field(doc, acc_min_opt, "min_power", acc_min);
      override_field(doc, acc_max_opt, "max_power", acc_max);
      override_field(doc, acc_ss_opt, "supersample", acc_ss);
      acc_kernel.apply(doc);
      const st::AccuracyConfig config = st::AccuracyConfig::from_json(doc);
      const auto rows = st::run_accuracy_study(config);
      if (acc_out.empty()) {
        st::write_accuracy_csv(std::cout, rows);
      } else {
        auto out = open_output(acc_out);
        st::write_accuracy_csv(out, rows);
        fair::io::write_json(fair::io::sidecar_path(acc_out), json{{"config", config.to_json()}});
      }
    } else if (*con) {
      json doc = load_config(con_config);
      override_field(doc, con_polygons_opt, "polygons", con_polygons);
      override_field(doc, con_seed_opt, "seed", con_seed);
      override_field(doc, con_res_opt, "resolutions", con_res);
      override_field(doc, con_ss_opt, "supersample", con_ss);
      override_field(doc, con_repeats_opt, "timing_repeats", con_repeats);
      if (con_no_timing) doc["record_timing"] = false;
      con_kernel.apply(doc);
      const st::ConsistencyConfig config = st::ConsistencyConfig::from_json(doc);
      if (!con_regions_out.empty()) {
        std::vector<fair::io::Region> regions;
        const auto polygons = st::study_polygons(config);
        for (std::size_t i = 0; i < polygons.size(); ++i) {
          regions.push_back({"poly" + std::to_string(i), polygons[i], std::nullopt});
        }
        fair::io::write_regions(con_regions_out, regions);
      }
      const st::ConsistencyReport report = st::run_consistency_study(config);
      if (con_out.empty()) {
        st::write_consistency_csv(std::cout, report);
      } else {
        auto out = open_output(con_out);
        st::write_consistency_csv(out, report);
        fair::io::write_json(fair::io::sidecar_path(con_out), json{{"config", config.to_json()}});
      }
      if (!con_hr_out.empty()) {
        auto out = open_output(con_hr_out);
        st::write_high_res_csv(out, report);
      }
    } else if (*cov) {
      json doc = load_config(cov_config);
      override_field(doc, cov_method_opt, "method", cov_method);
      override_field(doc, cov_res_opt, "resolution", cov_res);
      override_field(doc, cov_ss_opt, "supersample", cov_ss);
      override_field(doc, cov_density_opt, "density", cov_density);
      override_field(doc, cov_extra_opt, "extra_extent", cov_extra);
      cov_kernel.apply(doc);
      const st::ComputeCovConfig config = st::ComputeCovConfig::from_json(doc);
      const auto regions = fair::io::read_regions(cov_regions);
      const st::ComputeCovResult result = st::run_compute_cov(regions, config);
      std::vector<std::string> ids;
      for (const auto& r : regions) ids.push_back(r.id);
      json extra{{"config", config.to_json()},
                 {"point_counts", result.point_counts},
                 {"seconds", std::round(result.seconds * 1000.0) / 1000.0}};
      if (result.grid) extra["grid"] = fair::io::grid_to_json(*result.grid);
      fair::io::write_cov_matrix(cov_out, result.cov, ids, extra);
    } else if (*est) {
      json doc = load_config(est_config);
      override_field(doc, est_method_opt, "method", est_method);
      override_field(doc, est_res_opt, "resolution", est_res);
      override_field(doc, est_ss_opt, "supersample", est_ss);
      est_kernel.apply(doc);
      const st::EstimateConfig config = st::EstimateConfig::from_json(doc);
      const auto regions = fair::io::read_regions(est_regions);
      const st::EstimateReport report = st::run_estimate(regions, config);
      fair::io::write_json(est_out, report.to_json());
      for (const std::string& w : report.warnings) {
        if (w == st::kInsufficientData) {
          std::cerr << "error: estimation needs at least two regions; result written with warning flag\n";
          return kExitConfig;
        }
      }
    } else if (*pred) {
      const auto regions = fair::io::read_regions(pred_regions);
      const json estimate = fair::io::read_json(pred_mle);
      const std::optional<int> res =
          pred_res_opt->count() > 0 ? std::optional<int>(pred_res) : std::nullopt;
      const st::PredictionResult result = st::run_predict(regions, estimate, res);
      if (pred_format == "binary") {
        fair::io::write_surface_binary(pred_out, result.surface, result.grid);
      } else {
        fair::io::write_surface_csv(pred_out, result.surface, result.grid);
      }
      std::cout << json{{"setup_seconds", std::round(result.setup_seconds * 1000.0) / 1000.0},
                        {"predict_seconds", std::round(result.predict_seconds * 1000.0) / 1000.0},
                        {"pd_repaired", result.pd_repaired}}
                       .dump()
                << '\n';
    }
  } catch (const fair::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fair::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
