#include "svm/grid.hpp"

#include <algorithm>
#include <cmath>

#include "svm/errors.hpp"

namespace svm {

Grid1D Grid1D::make(double x_min, double x_max, std::size_t n_points) {
  if (n_points < 16) throw InvalidParameters("grid needs at least 16 points");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw InvalidParameters("grid needs finite x_min < x_max");
  }
  return Grid1D{x_min, x_max, n_points};
}

std::vector<double> Grid1D::coordinates() const {
  std::vector<double> xs(n_points);
  for (std::size_t i = 0; i < n_points; ++i) xs[i] = x(i);
  return xs;
}

double trapezoid(std::span<const double> f, double dx) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

double interpolate(const Grid1D& grid, std::span<const double> values, double x) {
  const double h = grid.dx();
  double s = (x - grid.x_min) / h;
  const double last = static_cast<double>(grid.n_points - 1);
  s = std::clamp(s, 0.0, last);
  auto i = static_cast<std::size_t>(s);
  if (i >= grid.n_points - 1) i = grid.n_points - 2;
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

Potential Potential::free(const Grid1D& grid) {
  Potential p;
  p.kind = Kind::free;
  p.values.assign(grid.n_points, 0.0);
  return p;
}

Potential Potential::harmonic(const Grid1D& grid, double omega, double mass) {
  Potential p;
  p.kind = Kind::harmonic;
  p.omega = omega;
  p.values.resize(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    p.values[i] = 0.5 * mass * omega * omega * x * x;
  }
  return p;
}

Potential Potential::custom(const Grid1D& grid, std::vector<double> values) {
  if (values.size() != grid.n_points) {
    throw InvalidParameters("custom potential table length differs from grid");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidParameters("custom potential must be finite");
  }
  Potential p;
  p.kind = Kind::custom;
  p.values = std::move(values);
  return p;
}

}  // namespace svm
