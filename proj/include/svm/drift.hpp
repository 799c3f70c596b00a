#pragma once

#include <iosfwd>
#include <vector>

#include "svm/grid.hpp"
#include "svm/params.hpp"
#include "svm/wavefield.hpp"

namespace svm {

// Fields of one time slice. On the support u_fwd - u_bwd = 2 nu d_x ln rho
// and u_m = (u_fwd + u_bwd) / 2; off the support the drifts hold the nearest
// in-support value.
struct DriftSlice {
  double time = 0.0;
  std::vector<double> rho;
  std::vector<double> u_m;
  std::vector<double> u_fwd;
  std::vector<double> u_bwd;
};

struct DriftTable {
  Grid1D grid;
  double nu = 0.5;
  double rho_floor = kDefaultRhoFloor;  // relative to max(rho) per slice
  std::vector<double> times;
  std::vector<DriftSlice> slices;

  void append(DriftSlice slice);

  // Slice closest in time to t.
  const DriftSlice& nearest(double t) const;
  std::size_t nearest_index(double t) const;
};

// rho = |psi|^2, u_m = 2 nu d_x theta and osmotic velocity nu d_x ln rho, with
// central differences of arg(psi) and ln rho (exact for Gaussian states).
DriftSlice extract_drifts(const WaveField& state, const SvmParams& params,
                          double rho_floor = kDefaultRhoFloor);

// Builds a table on a coarser grid keeping every `stride`-th node.
// (n_points - 1) must be divisible by stride.
DriftTable decimate(const DriftTable& table, std::size_t stride);

// CSV: t,x,rho,u_m,u_fwd,u_bwd
void write_drift_csv(std::ostream& out, const DriftTable& table);

}  // namespace svm
