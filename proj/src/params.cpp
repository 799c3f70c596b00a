#include "svm/params.hpp"

#include <cmath>
#include <string>

#include "svm/errors.hpp"

namespace svm {

SvmParams SvmParams::quantum(double mass, double hbar, int dim, double gamma) {
  SvmParams p;
  p.alpha1 = 0.0;
  p.alpha2 = 0.5;
  p.mass = mass;
  p.hbar = hbar;
  p.nu = hbar / (2.0 * mass);
  p.dim = dim;
  p.gamma = gamma;
  return p;
}

void SvmParams::validate() const {
  const bool finite = std::isfinite(alpha1) && std::isfinite(alpha2) &&
                      std::isfinite(nu) && std::isfinite(mass) &&
                      std::isfinite(hbar) && std::isfinite(gamma);
  if (!finite) throw InvalidParameters("non-finite parameter");
  if (!(nu > 0.0)) throw InvalidParameters("nu must be > 0");
  if (!(mass > 0.0)) throw InvalidParameters("mass must be > 0");
  if (!(hbar > 0.0)) throw InvalidParameters("hbar must be > 0");
  if (dim < 1) throw InvalidParameters("dim must be >= 1");
  if (gamma < 0.0) throw InvalidParameters("gamma must be >= 0");
}

bool SvmParams::is_quantum_point(double rtol) const {
  const double nu_qm = hbar / (2.0 * mass);
  return alpha1 == 0.0 && alpha2 == 0.5 &&
         std::abs(nu - nu_qm) <= rtol * std::abs(nu_qm);
}

void SvmParams::require_quantum_point(const char* who) const {
  if (!is_quantum_point()) {
    throw ParameterMismatch(std::string(who) +
                            " requires (alpha1, alpha2) = (0, 1/2) and "
                            "nu = hbar / (2 mass)");
  }
}

KineticMatrix build_matrix(const SvmParams& params) {
  const double a1 = params.alpha1;
  const double a2 = params.alpha2;
  KineticMatrix m;
  m.entries[0][0] = (0.5 + a2) * (0.5 + a1);
  m.entries[0][1] = 0.5 * (0.5 - a2);
  m.entries[1][0] = m.entries[0][1];
  m.entries[1][1] = (0.5 + a2) * (0.5 - a1);
  return m;
}

double det_m(const SvmParams& params) {
  const double a1 = params.alpha1;
  const double a2 = params.alpha2;
  const double s = 0.5 + a2;
  return 0.5 * a2 - a1 * a1 * s * s;
}

std::pair<double, double> kinetic_eigenvalues(const SvmParams& params) {
  const KineticMatrix m = build_matrix(params);
  const double tr = m.trace();
  const double det = det_m(params);
  const double diff = m.entries[0][0] - m.entries[1][1];
  // Discriminant written as a sum of squares so it never goes negative.
  const double root = std::sqrt(diff * diff + 4.0 * m.entries[0][1] * m.entries[0][1]);
  if (tr >= 0.0) {
    const double big = 0.5 * (tr + root);
    if (big == 0.0) return {0.0, 0.0};
    return {big, det / big};
  }
  const double small = 0.5 * (tr - root);
  return {det / small, small};
}

bool is_singular(const SvmParams& params, double tol) {
  return std::abs(det_m(params)) <= tol;
}

bool kinetic_positivity(const SvmParams& params) {
  return build_matrix(params).trace() > 0.0 && det_m(params) > 0.0;
}

TransportCoefficients transport_coefficients(const SvmParams& params) {
  return {params.alpha1 * (1.0 + 2.0 * params.alpha2) * params.nu,
          2.0 * params.alpha2 * params.nu * params.nu};
}

MomentumPair momenta_from_velocities(const SvmParams& params, VelocityPair vp) {
  const KineticMatrix m = build_matrix(params);
  const double s = 2.0 * params.mass;
  return {s * (m.entries[0][0] * vp.forward + m.entries[0][1] * vp.backward),
          s * (m.entries[1][0] * vp.forward + m.entries[1][1] * vp.backward)};
}

VelocityPair velocities_from_momenta(const SvmParams& params, MomentumPair mp,
                                     double tol) {
  const double det = det_m(params);
  if (std::abs(det) <= tol) {
    throw SingularKineticMatrix("|det M| = " + std::to_string(std::abs(det)) +
                                " below tolerance; momenta are undefined");
  }
  const KineticMatrix m = build_matrix(params);
  const double s = 1.0 / (2.0 * params.mass * det);
  return {s * (m.entries[1][1] * mp.forward - m.entries[0][1] * mp.backward),
          s * (-m.entries[1][0] * mp.forward + m.entries[0][0] * mp.backward)};
}

double uncertainty_lower_bound(const SvmParams& params) {
  const double mu = transport_coefficients(params).mu;
  const double nu2 = params.nu * params.nu;
  return 4.0 * params.mass * params.dim * nu2 * std::abs(det_m(params)) /
         std::sqrt(nu2 + mu * mu);
}

double uncertainty_bound_full(const SvmParams& params, double corr) {
  const auto [mu, kappa] = transport_coefficients(params);
  const double nu2 = params.nu * params.nu;
  const double md = params.mass * params.dim;
  const double denom = nu2 + mu * mu;
  const double shift = corr - md * mu * (kappa + nu2) / denom;
  const double gap = kappa - mu * mu;
  return std::sqrt((1.0 + mu * mu / nu2) * shift * shift +
                   md * md * gap * gap / denom);
}

}  // namespace svm
