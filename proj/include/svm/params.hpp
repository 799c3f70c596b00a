#pragma once

// Kinetic-parameter algebra of the stochastic Lagrangian
//
//   L = (m/2)[(1/2+a2){(1/2+a1)(Dr)^2 + (1/2-a1)(D~r)^2} + (1/2-a2)(D~r)(Dr)] - V(r)
//
// The Legendre transform of L maps the drift pair (u, u~) onto the momentum
// pair (p, p~) through the symmetric 2x2 matrix M: (p, p~) = 2 m M (u, u~).
// Everything here is a pure function of an immutable SvmParams value.

#include <array>
#include <utility>

namespace svm {

struct SvmParams {
  double alpha1 = 0.0;
  double alpha2 = 0.5;
  double nu = 0.5;     // noise strength, length^2 / time
  double mass = 1.0;
  double hbar = 1.0;   // stored independently of nu; only used to express bounds
  int dim = 1;         // multiplicity in the bounds; grids are always 1-D
  double gamma = 0.0;  // dissipation rate, 0 for conservative runs

  // (a1, a2) = (0, 1/2) with nu = hbar / (2 m).
  static SvmParams quantum(double mass = 1.0, double hbar = 1.0, int dim = 1,
                           double gamma = 0.0);

  // Throws InvalidParameters unless nu > 0, mass > 0, hbar > 0, dim >= 1,
  // gamma >= 0 and every field is finite.
  void validate() const;

  bool is_quantum_point(double rtol = 1e-12) const;

  // Throws ParameterMismatch when the run requires the quantum point.
  void require_quantum_point(const char* who) const;
};

inline constexpr double kSingularTolerance = 1e-10;

struct KineticMatrix {
  std::array<std::array<double, 2>, 2> entries{};

  double trace() const { return entries[0][0] + entries[1][1]; }
  double determinant() const {
    return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
  }
};

struct TransportCoefficients {
  double mu = 0.0;     // alpha1 (1 + 2 alpha2) nu
  double kappa = 0.0;  // 2 alpha2 nu^2
};

struct VelocityPair {
  double forward = 0.0;   // u
  double backward = 0.0;  // u~
};

struct MomentumPair {
  double forward = 0.0;   // p
  double backward = 0.0;  // p~
};

KineticMatrix build_matrix(const SvmParams& params);

// a2/2 - a1^2 (1/2 + a2)^2
double det_m(const SvmParams& params);

// Roots of l^2 - l Tr M + det M = 0, descending.
std::pair<double, double> kinetic_eigenvalues(const SvmParams& params);

bool is_singular(const SvmParams& params, double tol = kSingularTolerance);

// Tr M > 0 and det M > 0.
bool kinetic_positivity(const SvmParams& params);

TransportCoefficients transport_coefficients(const SvmParams& params);

MomentumPair momenta_from_velocities(const SvmParams& params, VelocityPair vp);

// Inverse map. Throws SingularKineticMatrix when |det M| <= tol.
VelocityPair velocities_from_momenta(const SvmParams& params, MomentumPair mp,
                                     double tol = kSingularTolerance);

// 4 m d nu^2 |det M| / sqrt(nu^2 + mu^2)
double uncertainty_lower_bound(const SvmParams& params);

/// Full right-hand side of the generalized inequality for a given position /
/// mean-velocity correlation corr = m E[(r - E r)(u_m - E u_m)]:
///
///   sqrt((1 + (mu/nu)^2) (corr - m d mu (kappa + nu^2)/(nu^2 + mu^2))^2
///        + m^2 d^2 (kappa - mu^2)^2 / (nu^2 + mu^2))
///
/// Never smaller than uncertainty_lower_bound(params).
double uncertainty_bound_full(const SvmParams& params, double corr);

}  // namespace svm
