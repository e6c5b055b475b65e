#pragma once

#include <cstddef>
#include <vector>

namespace fair {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Dense 2-D array stored row-major: element (ix, iy) lives at iy * nx + ix.
/// This matches the FFTW 2-D layout with the y axis as the slow dimension.
template <class T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(int nx, int ny, T fill = T{})
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, fill) {}

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int ix, int iy) { return data_[index(ix, iy)]; }
  const T& operator()(int ix, int iy) const { return data_[index(ix, iy)]; }

  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * nx_ + ix;
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

using RealField = Array2D<double>;

/// Axis-aligned lattice of n_x by n_y cells. Cell (ix, iy) covers
/// [origin.x + ix*dx, origin.x + (ix+1)*dx) x [...] and is represented by the
/// grid point at its centre. Cell counts are powers of two, at least 8.
class RegularGrid {
 public:
  RegularGrid(Point origin, int nx, int ny, double dx, double dy);

  /// Square grid of `resolution` cells per axis centred on `center`.
  static RegularGrid square(Point center, double extent, int resolution);

  Point origin() const noexcept { return origin_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double cell_area() const noexcept { return dx_ * dy_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }
  double extent_x() const noexcept { return nx_ * dx_; }
  double extent_y() const noexcept { return ny_ * dy_; }

  double x_center(int ix) const noexcept { return origin_.x + (ix + 0.5) * dx_; }
  double y_center(int iy) const noexcept { return origin_.y + (iy + 0.5) * dy_; }
  Point center(int ix, int iy) const noexcept { return {x_center(ix), y_center(iy)}; }

  friend bool operator==(const RegularGrid&, const RegularGrid&) = default;

 private:
  Point origin_;
  int nx_;
  int ny_;
  double dx_;
  double dy_;
};

bool is_power_of_two(long n) noexcept;

}  // namespace fair
