#pragma once

// Internal helpers shared by the grid-based modules.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace svm::detail {

// Nodes usable for log-density and phase differences: interior, above the
// floor, with strictly positive neighbours.
struct SupportMask {
  std::vector<char> in;
  std::size_t first = 0;
  std::size_t last = 0;
  bool empty = true;
  bool connected = true;
};

SupportMask support_mask(std::span<const double> rho, double floor_rel);

// Replace values on nodes outside the mask by the nearest in-support value.
void clamp_to_support(std::vector<double>& v, const SupportMask& mask);

// Solves a tridiagonal system with constant off-diagonal `off` in place.
// `diag` and `rhs` have the same length; rhs is overwritten with the solution.
template <typename T>
void solve_tridiagonal_constant(std::span<const T> diag, T off, std::span<T> rhs) {
  const std::size_t n = diag.size();
  std::vector<T> c(n);
  T beta = diag[0];
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = off / beta;
    beta = diag[i] - off * c[i];
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

}  // namespace svm::detail
