#pragma once

// Generalized hydrodynamic (Madelung-type) evolution of (rho, u_m):
//
//   d_t rho = -d_x(rho u_m)
//   (d_t + u_m d_x) u_m - visc - 2 kappa d_x(d_xx sqrt(rho) / sqrt(rho))
//       = -d_x V / m - gamma u_m            (particle form)
//
// with visc = d_x(2 mu d_x u_m) in the particle form and
// (1/rho) d_x(2 mu rho d_x u_m) - d_x P / rho in the continuum form.
// At (mu, kappa) = (0, nu^2) this is the Madelung form of the Schrodinger
// equation; kappa = 0, mu > 0 gives 1-D Navier-Stokes.

#include <iosfwd>
#include <span>
#include <vector>

#include "svm/drift.hpp"
#include "svm/grid.hpp"
#include "svm/params.hpp"

namespace svm {

struct FluidState {
  Grid1D grid;
  std::vector<double> rho;
  std::vector<double> u_m;
  double time = 0.0;

  double total_mass() const;
};

FluidState fluid_from_drifts(const Grid1D& grid, const DriftSlice& slice);

struct BarotropicEos {
  enum class Kind { quantum_only, polytrope, table };

  Kind kind = Kind::quantum_only;
  double k = 0.0;  // polytrope: eps = k rho^n / (n - 1), P = k rho^n
  double n = 2.0;
  std::vector<double> rho_table;  // strictly increasing
  std::vector<double> eps_table;

  static BarotropicEos quantum_only();
  static BarotropicEos polytrope(double k, double n);
  static BarotropicEos table(std::vector<double> rho, std::vector<double> eps);

  // Internal energy density. Piecewise cubic Hermite for tables.
  // Throws EosRangeError outside the tabulated range.
  double energy_density(double rho) const;
  // P = rho^2 d(eps/rho)/drho = rho eps'(rho) - eps(rho)
  double pressure(double rho) const;
};

std::vector<double> pressure(const BarotropicEos& eos, std::span<const double> rho);

enum class FluidForm { particle, continuum };

struct HydroForcing {
  FluidForm form = FluidForm::particle;
  std::vector<double> potential;  // empty: no external potential
  BarotropicEos eos;              // used by the continuum form only
};

// Largest dt accepted by step_hydro for this state.
double hydro_dt_limit(const FluidState& state, const TransportCoefficients& transport,
                      const SvmParams& params);

// One Heun (explicit trapezoid) step. Both end nodes are held fixed.
// Throws CflViolation if dt exceeds hydro_dt_limit, NegativeDensity if the
// update drives rho below zero, NumericalFailure on non-finite values.
FluidState step_hydro(const FluidState& state, const HydroForcing& forcing,
                      const TransportCoefficients& transport, const SvmParams& params,
                      double dt, double rho_floor = kDefaultRhoFloor);

struct NewtonResidual {
  double time = 0.0;
  std::vector<double> residual;  // zero off the support
  double weighted_l2 = 0.0;      // sqrt(sum rho R^2 / sum rho) on the support
};

struct NewtonResidualReport {
  std::vector<NewtonResidual> slices;  // one per interior time slice
  double weighted_l2 = 0.0;            // RMS of the per-slice weighted norms
};

// Pointwise residual of the field-form stochastic Newton equation evaluated
// on solver output, with centered time differences. Throws
// InsufficientSlices for fewer than three slices.
NewtonResidualReport newton_residual(std::span<const DriftSlice> slices, const Grid1D& grid,
                                     std::span<const double> potential,
                                     const TransportCoefficients& transport,
                                     const SvmParams& params,
                                     FluidForm form = FluidForm::particle,
                                     const BarotropicEos& eos = {},
                                     double rho_floor = kDefaultRhoFloor);

// CSV: t,x,rho,u_m,residual  (residual column empty-valued 0 when absent)
void write_hydro_csv(std::ostream& out, std::span<const FluidState> states,
                     std::span<const NewtonResidual> residuals = {});

}  // namespace svm
