#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svm/params.hpp"

namespace svm {

// Uniform 1-D grid. The two end nodes carry the Dirichlet condition psi = 0.
struct Grid1D {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n_points = 1001;

  // Throws InvalidParameters for n_points < 16 or x_max <= x_min.
  static Grid1D make(double x_min, double x_max, std::size_t n_points);

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  std::vector<double> coordinates() const;

  bool operator==(const Grid1D&) const = default;
};

// Trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> f, double dx);

// Linear interpolation of nodal values; clamps outside [x_min, x_max].
double interpolate(const Grid1D& grid, std::span<const double> values, double x);

struct Potential {
  enum class Kind { free, harmonic, custom };

  Kind kind = Kind::free;
  double omega = 0.0;  // harmonic only
  std::vector<double> values;  // energy at each grid node

  static Potential free(const Grid1D& grid);
  // V = m omega^2 x^2 / 2
  static Potential harmonic(const Grid1D& grid, double omega, double mass);
  // Throws InvalidParameters if the table length is wrong or any value is non-finite.
  static Potential custom(const Grid1D& grid, std::vector<double> values);
};

}  // namespace svm
