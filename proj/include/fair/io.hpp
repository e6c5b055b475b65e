#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fair/covmatrix.hpp"
#include "fair/geometry.hpp"
#include "fair/grid.hpp"
#include "fair/kernels.hpp"

namespace fair::io {

using nlohmann::json;

/// One entry of a regions file: {"id": "...", "vertices": [[x, y], ...], "value": 1.5}.
struct Region {
  std::string id;
  Polygon polygon;
  std::optional<double> value;
};

std::vector<Region> parse_regions(const json& doc);
std::vector<Region> read_regions(const std::filesystem::path& path);
json regions_to_json(std::span<const Region> regions);
void write_regions(const std::filesystem::path& path, std::span<const Region> regions);
std::vector<Polygon> polygons_of(std::span<const Region> regions);

json kernel_to_json(const CovarianceKernel& kernel);
/// Missing fields fall back to `defaults`.
CovarianceKernel kernel_from_json(const json& doc, const CovarianceKernel& defaults);

json grid_to_json(const RegularGrid& grid);
RegularGrid grid_from_json(const json& doc);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

/// CSV with a header row of region ids, then one row per region. A sidecar
/// `<path>.json` records {method, resolution, kernel} plus `extra` fields.
void write_cov_matrix(const std::filesystem::path& path, const CovMatrix& cov,
                      std::span<const std::string> ids, const json& extra = json::object());

struct LoadedCovMatrix {
  CovMatrix cov;
  std::vector<std::string> ids;
  json sidecar;
};
LoadedCovMatrix read_cov_matrix(const std::filesystem::path& path);

/// Rows "x,y,value" at every grid point.
void write_surface_csv(const std::filesystem::path& path, const RealField& field,
                       const RegularGrid& grid);

/// Raw little-endian float64 values, row-major with x fastest, and a sidecar
/// `<path>.json` {origin, n_x, n_y, delta_x, delta_y}. Round trips bit-exactly.
void write_surface_binary(const std::filesystem::path& path, const RealField& field,
                          const RegularGrid& grid);

struct LoadedSurface {
  RegularGrid grid;
  RealField field;
};
LoadedSurface read_surface_binary(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace fair::io
