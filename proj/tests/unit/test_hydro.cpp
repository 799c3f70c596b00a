#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "svm/errors.hpp"
#include "svm/hydro.hpp"
#include "svm/wavefield.hpp"

using namespace svm;

namespace {

const SvmParams kQm = SvmParams::quantum();

double l1(const std::vector<double>& a, const std::vector<double>& b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * dx;
}

double kinetic(const FluidState& f) {
  std::vector<double> e(f.rho.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = 0.5 * f.rho[i] * f.u_m[i] * f.u_m[i];
  return trapezoid(e, f.grid.dx());
}

double internal(const FluidState& f, const BarotropicEos& eos) {
  std::vector<double> e(f.rho.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = eos.energy_density(f.rho[i]);
  return trapezoid(e, f.grid.dx());
}

// Largest step count multiple giving dt below the guard.
std::pair<int, double> steps_for(const FluidState& f, const TransportCoefficients& tc,
                                 const SvmParams& p, double t, double safety) {
  const int n = static_cast<int>(std::ceil(t / (safety * hydro_dt_limit(f, tc, p))));
  return {n, t / n};
}

struct MadelungError {
  double rho = 0.0;
  double u = 0.0;
};

MadelungError madelung_error(std::size_t n_points) {
  const auto g = Grid1D::make(-10.0, 10.0, n_points);
  const auto v = Potential::free(g);
  auto wf = init_state(g, GaussianState{0.0, 1.0, 0.0}, kQm);
  const auto tc = transport_coefficients(kQm);
  auto f = fluid_from_drifts(g, extract_drifts(wf, kQm));
  const auto [steps, dt] = steps_for(f, tc, kQm, 1.0, 0.45);
  MadelungError err;
  for (int s = 1; s <= steps; ++s) {
    wf = step_schrodinger(wf, v, kQm, dt);
    f = step_hydro(f, {}, tc, kQm, dt);
    if (s % (steps / 10) == 0 || s == steps) {
      const auto d = extract_drifts(wf, kQm);
      err.rho = std::max(err.rho, l1(f.rho, d.rho, g.dx()));
      double eu = 0.0;
      for (std::size_t i = 0; i < n_points; ++i) eu += d.rho[i] * std::abs(f.u_m[i] - d.u_m[i]);
      err.u = std::max(err.u, eu * g.dx());
    }
  }
  return err;
}

}  // namespace

TEST_CASE("pressure closures") {
  CHECK(BarotropicEos::quantum_only().pressure(3.0) == 0.0);
  CHECK(BarotropicEos::polytrope(1.0, 2.0).pressure(2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(BarotropicEos::polytrope(1.0, 2.0).energy_density(2.0) == doctest::Approx(4.0));

  const auto rho = std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto p = pressure(BarotropicEos::polytrope(0.5, 3.0), rho);
  REQUIRE(p.size() == 5);
  CHECK(p[4] == doctest::Approx(0.5 * 8.0));

  CHECK_THROWS_AS(BarotropicEos::polytrope(1.0, 1.0), InvalidParameters);
}

TEST_CASE("tabulated eos is consistent with its energy density") {
  std::vector<double> r, e;
  for (int i = 0; i <= 400; ++i) {
    r.push_back(0.5 + 0.005 * i);
    e.push_back(std::pow(r.back(), 2.5));
  }
  const auto eos = BarotropicEos::table(r, e);
  for (double x : {0.6, 0.91, 1.234, 2.0, 2.45}) {
    const double h = 1e-5;
    const double slope = (eos.energy_density(x + h) - eos.energy_density(x - h)) / (2 * h);
    CHECK(std::abs(eos.pressure(x) - (x * slope - eos.energy_density(x))) < 1e-6);
    // P = 1.5 rho^2.5 for eps = rho^2.5
    CHECK(eos.pressure(x) == doctest::Approx(1.5 * std::pow(x, 2.5)).epsilon(1e-4));
  }
  CHECK_THROWS_AS(eos.pressure(0.4), EosRangeError);
  CHECK_THROWS_AS(eos.pressure(2.6), EosRangeError);
  CHECK_THROWS_AS(BarotropicEos::table({1.0, 0.5, 2.0}, {1.0, 1.0, 1.0}), InvalidParameters);
}

TEST_CASE("Madelung stationary ground state") {
  const auto g = Grid1D::make(-8.0, 8.0, 401);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto wf = init_state(g, HarmonicGround{1.0}, kQm);
  const auto tc = transport_coefficients(kQm);
  const auto f0 = fluid_from_drifts(g, extract_drifts(wf, kQm));
  HydroForcing forcing;
  forcing.potential = v.values;
  const auto [steps, dt] = steps_for(f0, tc, kQm, 2.0 * M_PI, 0.45);
  auto f = f0;
  for (int s = 0; s < steps; ++s) f = step_hydro(f, forcing, tc, kQm, dt);
  CHECK(l1(f.rho, f0.rho, g.dx()) < 1e-8);
  double umax = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    if (f0.rho[i] > 1e-8) umax = std::max(umax, std::abs(f.u_m[i]));
  }
  CHECK(umax < 1e-8);
}

TEST_CASE("Madelung evolution tracks the Schrodinger solver") {
  const auto coarse = madelung_error(1001);
  const auto fine = madelung_error(2001);
  MESSAGE("L1 rho ", coarse.rho, " -> ", fine.rho, ", weighted L1 u ", coarse.u, " -> ", fine.u);
  CHECK(coarse.rho < 1e-3);
  CHECK(coarse.u < 1e-3);
  CHECK(coarse.rho / fine.rho > 3.0);
  CHECK(coarse.rho / fine.rho < 5.0);
  CHECK(coarse.u / fine.u > 3.0);
}

TEST_CASE("mass conservation and Galilean shift") {
  const auto g = Grid1D::make(-12.0, 12.0, 1201);
  const auto tc = transport_coefficients(kQm);
  auto base = fluid_from_drifts(
      g, extract_drifts(init_state(g, GaussianState{-0.5, 1.0, 0.0}, kQm), kQm));
  auto boosted = base;
  const double c = 1.0;
  for (auto& u : boosted.u_m) u += c;
  const double m0 = base.total_mass();
  const auto [steps, dt] = steps_for(boosted, tc, kQm, 1.0, 0.45);
  for (int s = 0; s < steps; ++s) {
    base = step_hydro(base, {}, tc, kQm, dt);
    boosted = step_hydro(boosted, {}, tc, kQm, dt);
  }
  CHECK(std::abs(boosted.total_mass() - m0) < 1e-8);
  CHECK(std::abs(base.total_mass() - m0) < 1e-8);
  // c t = 1 is exactly 50 grid spacings.
  std::vector<double> shifted(g.n_points, 0.0);
  for (std::size_t i = 50; i < g.n_points; ++i) shifted[i] = base.rho[i - 50];
  CHECK(l1(boosted.rho, shifted, g.dx()) < 1e-3);
}

TEST_CASE("Navier-Stokes limit dissipates energy") {
  SvmParams p;
  p.alpha1 = 0.4;
  p.alpha2 = 0.0;
  const auto tc = transport_coefficients(p);
  REQUIRE(tc.kappa == 0.0);
  REQUIRE(tc.mu > 0.0);
  const auto g = Grid1D::make(-5.0, 5.0, 401);
  FluidState f0{g, {}, {}, 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    f0.rho.push_back(1.0 + 0.5 * std::exp(-x * x));
    f0.u_m.push_back(0.8 * std::sin(M_PI * x / 5.0));
  }

  SUBCASE("pressureless: kinetic energy decays") {
    HydroForcing forcing;
    forcing.form = FluidForm::continuum;
    auto f = f0;
    double ke = kinetic(f);
    const auto [steps, dt] = steps_for(f, tc, p, 1.0, 0.45);
    bool monotone = true;
    for (int s = 0; s < steps; ++s) {
      f = step_hydro(f, forcing, tc, p, dt);
      const double next = kinetic(f);
      monotone = monotone && next <= ke;
      ke = next;
    }
    CHECK(monotone);
    CHECK(ke < 0.9 * kinetic(f0));
  }
  SUBCASE("polytrope: total energy decays") {
    HydroForcing forcing;
    forcing.form = FluidForm::continuum;
    forcing.eos = BarotropicEos::polytrope(0.5, 2.0);
    auto f = f0;
    double e = kinetic(f) + internal(f, forcing.eos);
    const double e0 = e;
    const auto [steps, dt] = steps_for(f, tc, p, 1.0, 0.2);
    bool monotone = true;
    for (int s = 0; s < steps; ++s) {
      f = step_hydro(f, forcing, tc, p, dt);
      const double next = kinetic(f) + internal(f, forcing.eos);
      monotone = monotone && next <= e + 1e-12;
      e = next;
    }
    CHECK(monotone);
    CHECK(e < e0);
  }
}

TEST_CASE("step_hydro errors") {
  const auto g = Grid1D::make(-5.0, 5.0, 101);
  const auto tc = transport_coefficients(kQm);
  FluidState f{g, std::vector<double>(101, 1.0), std::vector<double>(101, 0.0), 0.0};
  const double limit = hydro_dt_limit(f, tc, kQm);
  CHECK_THROWS_AS(step_hydro(f, {}, tc, kQm, 1.01 * limit), CflViolation);
  f.u_m.assign(101, 10.0);
  CHECK(hydro_dt_limit(f, tc, kQm) == doctest::Approx(0.5 * g.dx() / 10.0));

  // A sharp density hole with a large compressive flow empties nodes.
  FluidState hole{g, std::vector<double>(101, 1.0), std::vector<double>(101, 0.0), 0.0};
  for (std::size_t i = 0; i < 101; ++i) hole.u_m[i] = i < 50 ? -3.0 : 3.0;
  hole.rho[50] = 1e-3;
  hole.rho[49] = hole.rho[51] = 1e-3;
  const double dt = hydro_dt_limit(hole, tc, kQm);
  CHECK_THROWS_AS(step_hydro(hole, {}, tc, kQm, dt), NegativeDensity);
}

TEST_CASE("Newton residual of solver output") {
  const auto run = [](std::size_t n_points, double dt) {
    const auto g = Grid1D::make(-10.0, 10.0, n_points);
    const auto v = Potential::harmonic(g, 1.0, 1.0);
    auto wf = init_state(g, HarmonicCoherent{1.0, 1.0}, kQm);
    for (int s = 0; s < static_cast<int>(std::lround(0.5 / dt)); ++s) {
      wf = step_schrodinger(wf, v, kQm, dt);
    }
    std::vector<DriftSlice> slices;
    for (int k = 0; k < 3; ++k) {
      slices.push_back(extract_drifts(wf, kQm));
      wf = step_schrodinger(wf, v, kQm, dt);
    }
    return newton_residual(slices, g, v.values, transport_coefficients(kQm), kQm);
  };
  const auto coarse = run(1001, 0.01);
  const auto fine = run(2001, 0.005);
  MESSAGE("residual ", coarse.weighted_l2, " -> ", fine.weighted_l2);
  REQUIRE(coarse.slices.size() == 1);
  CHECK(coarse.weighted_l2 < 1e-3);
  CHECK(coarse.weighted_l2 / fine.weighted_l2 > 3.0);
  CHECK(coarse.weighted_l2 / fine.weighted_l2 < 5.0);

  SUBCASE("randomized fields as negative control") {
    const auto g = Grid1D::make(-10.0, 10.0, 1001);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.5, 1.5), vel(-1.0, 1.0);
    std::vector<DriftSlice> slices;
    for (int k = 0; k < 3; ++k) {
      DriftSlice s;
      s.time = 0.01 * k;
      for (std::size_t i = 0; i < g.n_points; ++i) {
        const double x = g.x(i);
        s.rho.push_back(std::exp(-x * x) * uni(rng));
        s.u_m.push_back(vel(rng));
      }
      slices.push_back(s);
    }
    const auto r = newton_residual(slices, g, Potential::harmonic(g, 1.0, 1.0).values,
                                   transport_coefficients(kQm), kQm);
    CHECK(r.weighted_l2 > 100.0 * coarse.weighted_l2);
  }
}

TEST_CASE("Newton residual of stationary data and errors") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto wf = init_state(g, HarmonicGround{1.0}, kQm);
  auto s = extract_drifts(wf, kQm);
  std::vector<DriftSlice> slices;
  for (int k = 0; k < 4; ++k) {
    s.time = 0.01 * k;
    slices.push_back(s);
  }
  const auto r = newton_residual(slices, g, v.values, transport_coefficients(kQm), kQm);
  CHECK(r.slices.size() == 2);
  CHECK(r.weighted_l2 < 1e-10);

  CHECK_THROWS_AS(newton_residual(std::span(slices).first(2), g, v.values,
                                  transport_coefficients(kQm), kQm),
                  InsufficientSlices);

  std::ostringstream os;
  const std::vector<FluidState> states{fluid_from_drifts(g, slices[1])};
  write_hydro_csv(os, states, r.slices);
  const auto text = os.str();
  CHECK(text.rfind("t,x,rho,u_m,residual\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 1001);
}
