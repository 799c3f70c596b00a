#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "svm/grid.hpp"
#include "svm/params.hpp"

namespace svm {

using cplx = std::complex<double>;

inline constexpr double kDefaultRhoFloor = 1e-12;  // relative to max(rho)

struct WaveField {
  Grid1D grid;
  std::vector<cplx> psi;
  double time = 0.0;

  std::vector<double> density() const;
  double norm() const;  // trapezoid integral of |psi|^2
};

// psi ~ exp(-(x - center)^2 / (4 width^2) + i wavenumber x); width is the
// position standard deviation.
struct GaussianState {
  double center = 0.0;
  double width = 1.0;
  double wavenumber = 0.0;
};

// Ground state of the discretized oscillator Hamiltonian on the grid, so it
// is stationary under the Crank-Nicolson steppers to round-off.
struct HarmonicGround {
  double omega = 1.0;
};

// Ground-state-width Gaussian displaced by `displacement`, zero mean momentum.
struct HarmonicCoherent {
  double omega = 1.0;
  double displacement = 1.0;
};

using InitialState = std::variant<GaussianState, HarmonicGround, HarmonicCoherent>;

// Unit-normalized initial state. Throws BoxTooSmall if the amplitude at either
// boundary exceeds 1e-10, InvalidParameters for width <= 0 or omega <= 0.
WaveField init_state(const Grid1D& grid, const InitialState& kind,
                     const SvmParams& params);

// Crank-Nicolson step of i hbar dpsi/dt = [-hbar^2/(2m) d_xx + V] psi with
// Dirichlet ends. Throws ParameterMismatch off the quantum point.
WaveField step_schrodinger(const WaveField& state, const Potential& potential,
                           const SvmParams& params, double dt);

// Strang-split step of the Kostin equation: the phase-proportional potential
// hbar gamma (theta - <theta>) for dt/2, a Crank-Nicolson step of the linear
// Hamiltonian, then dt/2 of the phase potential again. The phase sub-flow is
// integrated exactly: theta - <theta> decays by exp(-gamma dt/2) while rho
// and <theta> stay fixed.
WaveField step_kostin(const WaveField& state, const Potential& potential,
                      const SvmParams& params, double dt,
                      double rho_floor = kDefaultRhoFloor);

// Crank-Nicolson step of the Kanai Hamiltonian
//   H(t) = -(hbar^2/2m) e^{-gamma t} d_xx + V e^{gamma t}
// with the coefficients frozen at t + dt/2.
WaveField step_kanai(const WaveField& state, const Potential& potential,
                     const SvmParams& params, double dt);

// Phase theta(x) with psi = sqrt(rho) e^{i theta}, integrated (trapezoid)
// from the density maximum using d_x theta = Im(psi* d_x psi) / rho. Values
// outside the support are held at the nearest support value. Throws
// DisconnectedSupport if the support {rho > floor * max rho} is not one
// interval.
std::vector<double> phase_field(const WaveField& state,
                                double rho_floor = kDefaultRhoFloor);

// Density-weighted mean of a nodal field.
double density_mean(const WaveField& state, std::span<const double> field);

// <H> with the kinetic term in the grid-consistent form
// (hbar^2/2m) sum |psi_{j+1} - psi_j|^2 / dx, which Crank-Nicolson conserves.
double energy(const WaveField& state, const Potential& potential,
              const SvmParams& params);

// Moments of x and of the operator -i hbar d_x (sixth-order differences).
struct OperatorMoments {
  double norm = 0.0;
  double x_mean = 0.0;
  double x2 = 0.0;
  double p_mean = 0.0;
  double p2 = 0.0;

  double delta_x() const;
  double delta_p() const;
};

OperatorMoments operator_moments(const WaveField& state, double hbar);

}  // namespace svm
