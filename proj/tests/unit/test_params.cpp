#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "svm/errors.hpp"
#include "svm/params.hpp"

using namespace svm;

namespace {

SvmParams with_alphas(double a1, double a2, double nu = 0.5, double mass = 1.0) {
  SvmParams p;
  p.alpha1 = a1;
  p.alpha2 = a2;
  p.nu = nu;
  p.mass = mass;
  p.hbar = 2.0 * mass * nu;
  return p;
}

// Plain 2x2 determinant written out separately from det_m.
double det2(const KineticMatrix& m) {
  return m.entries[0][0] * m.entries[1][1] - m.entries[0][1] * m.entries[1][0];
}

}  // namespace

TEST_CASE("build_matrix reproduces the kinetic matrix entries") {
  auto m = build_matrix(with_alphas(0.0, 0.5));
  CHECK(m.entries[0][0] == 0.5);
  CHECK(m.entries[0][1] == 0.0);
  CHECK(m.entries[1][0] == 0.0);
  CHECK(m.entries[1][1] == 0.5);

  m = build_matrix(with_alphas(0.0, 0.0));
  CHECK(m.entries[0][0] == 0.25);
  CHECK(m.entries[0][1] == 0.25);
  CHECK(m.entries[1][0] == 0.25);
  CHECK(m.entries[1][1] == 0.25);

  // (1/2 + 1/2)(1/2 +- 1/2): a rank-one matrix on the singular locus.
  m = build_matrix(with_alphas(0.5, 0.5));
  CHECK(m.entries[0][0] == 1.0);
  CHECK(m.entries[0][1] == 0.0);
  CHECK(m.entries[1][1] == 0.0);
}

TEST_CASE("det_m closed form") {
  CHECK(det_m(with_alphas(0.0, 0.5)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(det_m(with_alphas(0.5, 0.5))) < 1e-15);
  CHECK(det_m(with_alphas(0.1, 0.3)) == doctest::Approx(0.1436).epsilon(1e-14));
}

TEST_CASE("kinetic eigenvalues") {
  auto [l1, l2] = kinetic_eigenvalues(with_alphas(0.0, 0.5));
  CHECK(l1 == doctest::Approx(0.5));
  CHECK(l2 == doctest::Approx(0.5));
  std::tie(l1, l2) = kinetic_eigenvalues(with_alphas(0.5, 0.5));
  CHECK(l1 == doctest::Approx(1.0));
  CHECK(std::abs(l2) < 1e-15);
}

TEST_CASE("singular locus and positivity examples") {
  CHECK(is_singular(with_alphas(0.5, 0.5), 1e-12));
  CHECK_FALSE(is_singular(with_alphas(0.0, 0.5), 1e-12));
  CHECK(is_singular(with_alphas(-0.5, 0.5), 1e-12));

  CHECK(kinetic_positivity(with_alphas(0.0, 0.5)));
  CHECK_FALSE(kinetic_positivity(with_alphas(0.5, 0.5)));
  CHECK_FALSE(kinetic_positivity(with_alphas(0.9, 0.5)));
}

TEST_CASE("transport coefficients") {
  auto t = transport_coefficients(with_alphas(0.0, 0.5, 0.5));
  CHECK(t.mu == 0.0);
  CHECK(t.kappa == doctest::Approx(0.25));
  t = transport_coefficients(with_alphas(0.3, 0.0, 0.7));
  CHECK(t.kappa == 0.0);
  CHECK(t.mu == doctest::Approx(0.3 * 0.7));
  t = transport_coefficients(with_alphas(0.1, 0.3, 1.0));
  CHECK(t.mu == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(t.kappa == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("velocity and momentum maps") {
  auto p = momenta_from_velocities(with_alphas(0.0, 0.5), {3.0, -3.0});
  CHECK(p.forward == doctest::Approx(3.0));
  CHECK(p.backward == doctest::Approx(-3.0));
  p = momenta_from_velocities(with_alphas(0.0, 0.0), {1.0, 1.0});
  CHECK(p.forward == doctest::Approx(1.0));
  CHECK(p.backward == doctest::Approx(1.0));

  auto v = velocities_from_momenta(with_alphas(0.0, 0.5), {3.0, -3.0});
  CHECK(v.forward == doctest::Approx(3.0));
  CHECK(v.backward == doctest::Approx(-3.0));

  CHECK_THROWS_AS(velocities_from_momenta(with_alphas(0.5, 0.5), {1.0, 2.0}),
                  SingularKineticMatrix);
  CHECK_THROWS_AS(velocities_from_momenta(with_alphas(0.0, 0.0), {1.0, 1.0}),
                  SingularKineticMatrix);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const auto prm = with_alphas(0.1, 0.3, 0.8, 1.7);
  for (int i = 0; i < 100; ++i) {
    const MomentumPair mp{u(rng), u(rng)};
    const auto back = momenta_from_velocities(prm, velocities_from_momenta(prm, mp));
    CHECK(std::abs(back.forward - mp.forward) < 1e-12);
    CHECK(std::abs(back.backward - mp.backward) < 1e-12);
  }
}

TEST_CASE("uncertainty bounds") {
  // Kennard: hbar / 2 with hbar = 2 m nu = 1.
  CHECK(uncertainty_lower_bound(with_alphas(0.0, 0.5, 0.5, 1.0)) ==
        doctest::Approx(0.5).epsilon(1e-15));
  auto p3 = with_alphas(0.0, 0.5, 0.5, 1.0);
  p3.dim = 3;
  CHECK(uncertainty_lower_bound(p3) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(uncertainty_lower_bound(with_alphas(0.5, 0.5)) < 1e-15);

  CHECK(uncertainty_bound_full(with_alphas(0.0, 0.5, 0.5, 1.0), 0.0) ==
        doctest::Approx(0.5).epsilon(1e-15));

  const auto prm = with_alphas(0.2, 0.4, 0.9, 1.3);
  const auto [mu, kappa] = transport_coefficients(prm);
  const double nu2 = prm.nu * prm.nu;
  const double corr_min = prm.mass * prm.dim * mu * (kappa + nu2) / (nu2 + mu * mu);
  CHECK(uncertainty_bound_full(prm, corr_min) ==
        doctest::Approx(uncertainty_lower_bound(prm)).epsilon(1e-13));
}

TEST_CASE("property: determinant routes agree and Vieta holds") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> a(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.05, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const auto prm = with_alphas(a(rng), a(rng), pos(rng), pos(rng));
    const auto m = build_matrix(prm);
    const auto [mu, kappa] = transport_coefficients(prm);
    const double d = det_m(prm);
    CHECK(std::abs(det2(m) - d) < 1e-12);
    CHECK(std::abs((kappa - mu * mu) / (4.0 * prm.nu * prm.nu) - d) < 1e-12);
    CHECK(m.entries[0][1] == m.entries[1][0]);
    const auto [l1, l2] = kinetic_eigenvalues(prm);
    CHECK(l1 >= l2);
    CHECK(std::abs(l1 + l2 - m.trace()) < 1e-12);
    CHECK(std::abs(l1 * l2 - d) < 1e-12);
  }
}

TEST_CASE("property: singular locus") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> a2(1e-6, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double alpha2 = a2(rng);
    const double alpha1 = std::sqrt(2.0 * alpha2) / (2.0 * alpha2 + 1.0);
    CHECK(std::abs(det_m(with_alphas(alpha1, alpha2))) < 1e-12);
    CHECK(std::abs(det_m(with_alphas(-alpha1, alpha2))) < 1e-12);
  }
}

TEST_CASE("property: round trip away from the singular locus") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-2.0, 2.0);
  std::uniform_real_distribution<double> v(-10.0, 10.0);
  int tested = 0;
  while (tested < 500) {
    const auto prm = with_alphas(a(rng), a(rng), 0.5, 1.0);
    if (std::abs(det_m(prm)) <= 1e-8) continue;
    ++tested;
    const VelocityPair vp{v(rng), v(rng)};
    const auto back = velocities_from_momenta(prm, momenta_from_velocities(prm, vp));
    const double scale = 1.0 + std::abs(vp.forward) + std::abs(vp.backward);
    CHECK(std::abs(back.forward - vp.forward) < 1e-10 * scale);
    CHECK(std::abs(back.backward - vp.backward) < 1e-10 * scale);
  }
}

TEST_CASE("property: full bound dominates the simple bound") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(-2.0, 2.0);
  std::uniform_real_distribution<double> c(-20.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    auto prm = with_alphas(a(rng), a(rng), 0.3 + std::abs(a(rng)), 1.0 + std::abs(a(rng)));
    prm.dim = 1 + i % 3;
    const double lo = uncertainty_lower_bound(prm);
    CHECK(uncertainty_bound_full(prm, c(rng)) >= lo - 1e-12);
  }
}

TEST_CASE("parameter validation") {
  SvmParams p = SvmParams::quantum();
  CHECK_NOTHROW(p.validate());
  CHECK(p.is_quantum_point());
  p.nu = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  p = SvmParams::quantum();
  p.nu = 0.6;
  CHECK_FALSE(p.is_quantum_point());
  CHECK_THROWS_AS(p.require_quantum_point("test"), ParameterMismatch);
}
