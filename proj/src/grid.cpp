#include "fair/grid.hpp"

#include <cmath>
#include <string>

#include "fair/errors.hpp"

namespace fair {

bool is_power_of_two(long n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

RegularGrid::RegularGrid(Point origin, int nx, int ny, double dx, double dy)
    : origin_(origin), nx_(nx), ny_(ny), dx_(dx), dy_(dy) {
  if (!is_power_of_two(nx) || !is_power_of_two(ny) || nx < 8 || ny < 8) {
    throw ConfigError("grid cell counts must be powers of two >= 8, got " +
                      std::to_string(nx) + " x " + std::to_string(ny));
  }
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
    throw ConfigError("grid spacing must be positive and finite");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
    throw ConfigError("grid origin must be finite");
  }
}

RegularGrid RegularGrid::square(Point center, double extent, int resolution) {
  if (!(extent > 0.0)) throw ConfigError("grid extent must be positive");
  const double spacing = extent / resolution;
  return RegularGrid({center.x - 0.5 * extent, center.y - 0.5 * extent}, resolution,
                     resolution, spacing, spacing);
}

}  // namespace fair
