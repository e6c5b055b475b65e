#include "fair/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fair/errors.hpp"

namespace fair::io {
namespace {

double number_field(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return doc[key].get<double>();
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::vector<Region> parse_regions(const json& doc) {
  if (!doc.is_array()) throw ConfigError("regions document must be a JSON array");
  std::vector<Region> regions;
  regions.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string where = "region #" + std::to_string(i);
    if (!item.is_object()) throw ConfigError(where + " is not an object");
    if (!item.contains("id") || !item["id"].is_string()) {
      throw ConfigError(where + " needs a string 'id'");
    }
    const std::string id = item["id"].get<std::string>();
    if (!item.contains("vertices") || !item["vertices"].is_array()) {
      throw ConfigError("region '" + id + "' needs a 'vertices' array");
    }
    std::vector<Point> vertices;
    for (const json& v : item["vertices"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError("region '" + id + "' has a vertex that is not [x, y]");
      }
      vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    std::optional<double> value;
    if (item.contains("value") && !item["value"].is_null()) {
      if (!item["value"].is_number()) throw ConfigError("region '" + id + "' value is not a number");
      value = item["value"].get<double>();
    }
    try {
      regions.push_back({id, Polygon(std::move(vertices)), value});
    } catch (const ConfigError& e) {
      throw ConfigError("region '" + id + "': " + e.what());
    }
  }
  return regions;
}

std::vector<Region> read_regions(const std::filesystem::path& path) {
  return parse_regions(read_json(path));
}

json regions_to_json(std::span<const Region> regions) {
  json doc = json::array();
  for (const Region& r : regions) {
    json vertices = json::array();
    for (const Point& p : r.polygon.vertices()) vertices.push_back({p.x, p.y});
    json item{{"id", r.id}, {"vertices", vertices}};
    if (r.value) item["value"] = *r.value;
    doc.push_back(std::move(item));
  }
  return doc;
}

void write_regions(const std::filesystem::path& path, std::span<const Region> regions) {
  write_json(path, regions_to_json(regions));
}

std::vector<Polygon> polygons_of(std::span<const Region> regions) {
  std::vector<Polygon> out;
  out.reserve(regions.size());
  for (const Region& r : regions) out.push_back(r.polygon);
  return out;
}

json kernel_to_json(const CovarianceKernel& kernel) {
  json doc{{"family", to_string(kernel.family())},
           {"sigma2", kernel.sigma2()},
           {"theta", kernel.theta()}};
  if (kernel.family() == KernelFamily::kMatern) doc["nu"] = kernel.nu();
  return doc;
}

CovarianceKernel kernel_from_json(const json& doc, const CovarianceKernel& defaults) {
  if (!doc.is_object()) throw ConfigError("kernel must be a JSON object");
  KernelFamily family = defaults.family();
  if (doc.contains("family")) {
    if (!doc["family"].is_string()) throw ConfigError("kernel family must be a string");
    family = parse_kernel_family(doc["family"].get<std::string>());
  }
  return CovarianceKernel(family, number_field(doc, "sigma2", defaults.sigma2()),
                          number_field(doc, "theta", defaults.theta()),
                          number_field(doc, "nu", defaults.nu()));
}

json grid_to_json(const RegularGrid& grid) {
  return json{{"origin", {grid.origin().x, grid.origin().y}},
              {"n_x", grid.nx()},
              {"n_y", grid.ny()},
              {"delta_x", grid.dx()},
              {"delta_y", grid.dy()}};
}

RegularGrid grid_from_json(const json& doc) {
  try {
    const json& origin = doc.at("origin");
    return RegularGrid({origin.at(0).get<double>(), origin.at(1).get<double>()},
                       doc.at("n_x").get<int>(), doc.at("n_y").get<int>(),
                       doc.at("delta_x").get<double>(), doc.at("delta_y").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed grid description: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void write_cov_matrix(const std::filesystem::path& path, const CovMatrix& cov,
                      std::span<const std::string> ids, const json& extra) {
  const Eigen::Index n = cov.values.rows();
  if (static_cast<Eigen::Index>(ids.size()) != n) {
    throw ConfigError("covariance matrix and id list differ in size");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << ids[static_cast<std::size_t>(j)];
  out << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << format_double(cov.values(i, j));
    out << '\n';
  }
  json side = extra;
  side["method"] = to_string(cov.method);
  side["resolution"] = cov.resolution;
  side["kernel"] = kernel_to_json(cov.kernel);
  write_json(sidecar_path(path), side);
}

LoadedCovMatrix read_cov_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::vector<std::string> ids;
  if (std::getline(in, line)) {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) ids.push_back(cell);
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd values(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ConfigError("covariance CSV is truncated");
    std::stringstream row(line);
    std::string cell;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ',')) throw ConfigError("covariance CSV row is short");
      values(i, j) = std::stod(cell);
    }
  }
  json side = read_json(sidecar_path(path));
  const CovarianceKernel kernel =
      kernel_from_json(side.at("kernel"), CovarianceKernel::gaussian());
  return {CovMatrix{std::move(values), parse_cov_method(side.at("method").get<std::string>()),
                    side.at("resolution").get<int>(), kernel},
          std::move(ids), std::move(side)};
}

void write_surface_csv(const std::filesystem::path& path, const RealField& field,
                       const RegularGrid& grid) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "x,y,value\n";
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      out << format_double(grid.x_center(ix)) << ',' << format_double(grid.y_center(iy)) << ','
          << format_double(field(ix, iy)) << '\n';
    }
  }
}

void write_surface_binary(const std::filesystem::path& path, const RealField& field,
                          const RegularGrid& grid) {
  static_assert(std::endian::native == std::endian::little, "binary surfaces assume little endian");
  if (field.nx() != grid.nx() || field.ny() != grid.ny()) {
    throw ConfigError("surface does not match its grid");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(field.data()),
            static_cast<std::streamsize>(field.size() * sizeof(double)));
  write_json(sidecar_path(path), grid_to_json(grid));
}

LoadedSurface read_surface_binary(const std::filesystem::path& path) {
  RegularGrid grid = grid_from_json(read_json(sidecar_path(path)));
  RealField field(grid.nx(), grid.ny());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(field.data()),
          static_cast<std::streamsize>(field.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(field.size() * sizeof(double))) {
    throw ConfigError("binary surface " + path.string() + " is shorter than its sidecar says");
  }
  return {grid, std::move(field)};
}

}  // namespace fair::io
