#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "svm/drift.hpp"
#include "svm/grid.hpp"
#include "svm/noise.hpp"
#include "svm/params.hpp"

namespace svm {

enum class Direction { forward, backward };

// Positions of n_traj trajectories at the recorded times, stored time-major
// with times ascending regardless of the integration direction.
struct TrajectoryEnsemble {
  std::size_t n_traj = 0;
  std::vector<double> times;
  std::vector<double> positions;
  Direction direction = Direction::forward;

  std::span<const double> at(std::size_t k) const {
    return {positions.data() + k * n_traj, n_traj};
  }
};

struct SimulationOptions {
  double dt = 0.01;
  std::size_t n_steps = 0;
  std::size_t record_every = 1;
  double t_start = 0.0;  // initial time (forward) or final time (backward)
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Inverse-CDF samples of the piecewise-linear density on the grid.
std::vector<double> sample_initial(const Grid1D& grid, std::span<const double> rho,
                                   std::size_t n_traj, std::uint64_t seed);

// Euler-Maruyama for dr = u dt + sqrt(2 nu) dW. Drifts use the nearest table
// slice in time and linear interpolation in x. Trajectories leaving the box
// are reflected one spacing inside it.
TrajectoryEnsemble simulate_forward(const DriftTable& table, std::span<const double> initial,
                                    const SimulationOptions& options);

// r(t - dt) = r(t) - u_bwd dt + sqrt(2 nu) dW~ from t_start downwards, using
// an independent noise stream.
TrajectoryEnsemble simulate_backward(const DriftTable& table, std::span<const double> final,
                                     const SimulationOptions& options);

// Binned conditional estimate of the mean forward or backward derivative at
// one recorded time.
struct MeanDerivative {
  double time = 0.0;
  std::vector<double> bin_centers;
  std::vector<double> estimate;  // NaN in excluded bins
  std::vector<double> field;     // u or u_bwd at the bin centers
  std::vector<std::size_t> counts;
  std::vector<char> used;  // count >= min_count
};

inline constexpr std::size_t kDerivativeBins = 64;
inline constexpr std::size_t kMinBinCount = 20;

// Forward: E[(r(t_{k+1}) - r(t_k)) / dt | r(t_k)], k = 0..n-2.
// Backward: E[(r(t_k) - r(t_{k-1})) / dt | r(t_k)], k = 1..n-1.
// Bins span mean +- 4 sd of r(t_k). Throws EmptyBin when no bin reaches
// min_count samples.
std::vector<MeanDerivative> mean_derivative(const TrajectoryEnsemble& ensemble,
                                            const DriftTable& table, Direction side,
                                            std::size_t n_bins = kDerivativeBins,
                                            std::size_t min_count = kMinBinCount);

struct SlopeFit {
  double estimate_slope = 0.0;
  double field_slope = 0.0;
};

// Count-weighted linear fits of estimate and field against x, pooled over
// all given times and restricted to bins within the central mass fraction.
SlopeFit pooled_slope(std::span<const MeanDerivative> derivatives, double mass_fraction = 0.8);

struct Momenta {
  std::vector<double> times;
  std::vector<double> p;     // layout as TrajectoryEnsemble::positions
  std::vector<double> pbar;
};

// (p, pbar) = e^{gamma t} 2 m M (u, u_bwd) at r(t). Throws SingularKineticMatrix.
Momenta evaluate_momenta(const TrajectoryEnsemble& ensemble, const DriftTable& table,
                         const SvmParams& params);

struct PhaseSpaceHistogram {
  std::vector<double> x_edges;
  std::vector<double> p_edges;
  std::vector<double> pbar_edges;
  std::vector<std::uint64_t> counts;  // index (ix * np + ip) * nq + iq
  std::size_t n_samples = 0;

  std::size_t nx() const { return x_edges.size() - 1; }
  std::size_t np() const { return p_edges.size() - 1; }
  std::size_t nq() const { return pbar_edges.size() - 1; }
  std::vector<std::uint64_t> x_marginal() const;
};

struct HistogramBins {
  std::size_t nx = 40;
  std::size_t np = 24;
  std::size_t nq = 24;
};

// Equal-width bins over mean +- 4 sd of each coordinate at recorded time
// index k; samples outside fall into the edge bins.
PhaseSpaceHistogram phase_space_histogram(const TrajectoryEnsemble& ensemble,
                                          const Momenta& momenta, std::size_t k,
                                          const HistogramBins& bins = {});

// Counts per bin with the same edge clamping as the phase-space histogram.
std::vector<std::uint64_t> position_histogram(std::span<const double> samples,
                                              std::span<const double> edges);

// Equal-width edges over mean +- half_width sd of the samples.
std::vector<double> sample_edges(std::span<const double> samples, std::size_t n_bins,
                                 double half_width = 4.0);

// L1 distance between the normalized histogram and the bin averages of the
// grid density: sum_b |count_b / (n w_b) - rho_b| w_b.
double histogram_l1(std::span<const std::uint64_t> counts, std::span<const double> edges,
                    const Grid1D& grid, std::span<const double> rho);

// Phase perturbation delta_theta(x, t); must vanish at both end times.
using PhasePerturbation = std::function<double(double x, double t)>;

struct ActionEstimate {
  std::vector<double> eps;
  std::vector<double> action;                     // I(eps) over all trajectories
  std::vector<std::vector<double>> batch_action;  // [batch][eps]
};

struct ActionOptions {
  double dt = 0.01;
  std::size_t n_steps = 0;
  double t_start = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t batches = 20;
};

// I(eps) = integral dt E[L] with drifts rebuilt from theta + eps delta_theta
// at fixed rho; L is the general stochastic Lagrangian, scaled by e^{gamma t}
// when gamma > 0. All eps share the same noise and initial positions.
ActionEstimate estimate_action(const DriftTable& table, std::span<const double> initial,
                               std::span<const double> potential, const SvmParams& params,
                               const PhasePerturbation& perturbation, std::span<const double> eps,
                               const ActionOptions& options);

struct ActionFit {
  double value = 0.0;  // I(0)
  double value_se = 0.0;
  double slope = 0.0;  // dI/deps at 0
  double slope_se = 0.0;
  double curvature = 0.0;  // d2I/deps2
  double curvature_se = 0.0;
};

// Quadratic least-squares fit per batch; means and standard errors over
// batches.
ActionFit fit_action(const ActionEstimate& estimate);

// CSV: traj,t,x,p,pbar
void write_trajectory_csv(std::ostream& out, const TrajectoryEnsemble& ensemble,
                          const Momenta& momenta, std::size_t max_traj);

// CSV: x_bin,P_bin,Pbar_bin,count  (nonzero bins only)
void write_histogram_csv(std::ostream& out, const PhaseSpaceHistogram& histogram);

}  // namespace svm
