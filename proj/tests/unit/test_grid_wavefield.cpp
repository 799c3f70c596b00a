#include <doctest.h>

#include <cmath>
#include <numbers>

#include "svm/errors.hpp"
#include "svm/wavefield.hpp"

using namespace svm;

namespace {

const SvmParams kQm = SvmParams::quantum();  // hbar = m = 1, nu = 1/2

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2_diff(const WaveField& a, const WaveField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) s += std::norm(a.psi[i] - b.psi[i]);
  return std::sqrt(s * a.grid.dx());
}

// Position moments by direct summation, independent of operator_moments.
double variance_x(const WaveField& wf) {
  double n = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < wf.psi.size(); ++i) {
    const double r = std::norm(wf.psi[i]);
    const double x = wf.grid.x(i);
    n += r;
    m1 += r * x;
    m2 += r * x * x;
  }
  m1 /= n;
  return m2 / n - m1 * m1;
}

double mean_x(const WaveField& wf) {
  double n = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < wf.psi.size(); ++i) {
    const double r = std::norm(wf.psi[i]);
    n += r;
    m1 += r * wf.grid.x(i);
  }
  return m1 / n;
}

template <typename Step>
WaveField evolve(WaveField wf, double dt, int steps, Step step) {
  for (int s = 0; s < steps; ++s) wf = step(wf, dt);
  return wf;
}

}  // namespace

TEST_CASE("grid validation and helpers") {
  CHECK_THROWS_AS(Grid1D::make(0.0, 1.0, 8), InvalidParameters);
  CHECK_THROWS_AS(Grid1D::make(1.0, 0.0, 100), InvalidParameters);
  const auto g = Grid1D::make(0.0, 1.0, 101);
  CHECK(g.dx() == doctest::Approx(0.01));
  std::vector<double> ones(101, 1.0);
  CHECK(trapezoid(ones, g.dx()) == doctest::Approx(1.0));
  std::vector<double> lin = g.coordinates();
  CHECK(interpolate(g, lin, 0.4567) == doctest::Approx(0.4567));
  CHECK(interpolate(g, lin, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("init_state: harmonic ground state") {
  const auto g = Grid1D::make(-10.0, 10.0, 2001);
  const auto wf = init_state(g, HarmonicGround{1.0}, kQm);
  CHECK(wf.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wf.psi.front() == cplx(0.0, 0.0));
  CHECK(wf.psi.back() == cplx(0.0, 0.0));
  // Discrete eigenstate is within O(dx^2) of pi^{-1/4} exp(-x^2/2).
  double dev = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    dev = std::max(dev, std::abs(std::abs(wf.psi[i]) -
                                 std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x)));
  }
  CHECK(dev < 1e-4);
}

TEST_CASE("init_state: gaussian width is the position deviation") {
  const auto g = Grid1D::make(-15.0, 15.0, 3001);
  const auto wf = init_state(g, GaussianState{0.0, 1.3, 0.0}, kQm);
  // Oracle: Gaussian integral, Var = sigma^2.
  CHECK(std::sqrt(variance_x(wf)) == doctest::Approx(1.3).epsilon(1e-10));
}

TEST_CASE("init_state: BoxTooSmall") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  CHECK_THROWS_AS(init_state(g, GaussianState{10.0, 1.0, 0.0}, kQm), BoxTooSmall);
  CHECK_THROWS_AS(init_state(g, GaussianState{0.0, -1.0, 0.0}, kQm), InvalidParameters);
}

TEST_CASE("step_schrodinger: ground state is stationary") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto wf0 = init_state(g, HarmonicGround{1.0}, kQm);
  for (double dt : {0.001, 0.05, 0.4}) {
    const auto wf = evolve(wf0, dt, 50, [&](const WaveField& w, double h) {
      return step_schrodinger(w, v, kQm, h);
    });
    double dev = 0.0;
    for (std::size_t i = 0; i < g.n_points; ++i) {
      dev = std::max(dev, std::abs(std::abs(wf.psi[i]) - std::abs(wf0.psi[i])));
    }
    CHECK(dev < 1e-10);
  }
}

TEST_CASE("step_schrodinger rejects non-quantum parameters") {
  const auto g = Grid1D::make(-10.0, 10.0, 201);
  const auto v = Potential::free(g);
  const auto wf = init_state(g, GaussianState{0.0, 1.0, 0.0}, kQm);
  SvmParams p = kQm;
  p.alpha1 = 0.1;
  CHECK_THROWS_AS(step_schrodinger(wf, v, p, 0.01), ParameterMismatch);
  p = kQm;
  p.nu = 0.7;
  CHECK_THROWS_AS(step_schrodinger(wf, v, p, 0.01), ParameterMismatch);
}

TEST_CASE("step_schrodinger: free packet spreading") {
  const double sigma0 = 1.0;
  const auto g = Grid1D::make(-20.0, 20.0, 2001);
  const auto v = Potential::free(g);
  WaveField wf = init_state(g, GaussianState{0.0, sigma0, 0.0}, kQm);
  const double dt = 0.01;
  for (int k = 1; k <= 200; ++k) {
    wf = step_schrodinger(wf, v, kQm, dt);
    if (k % 50 == 0) {
      const double t = wf.time;
      const double expect = sigma0 * sigma0 + std::pow(t / (2.0 * sigma0), 2);
      CHECK(variance_x(wf) == doctest::Approx(expect).epsilon(1e-4));
    }
  }
}

TEST_CASE("step_schrodinger: coherent state follows x0 cos(wt)") {
  const auto g = Grid1D::make(-10.0, 10.0, 4001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  WaveField wf = init_state(g, HarmonicCoherent{1.0, 1.0}, kQm);
  const double dt = 0.002;
  const int steps = static_cast<int>(std::round(2.0 * std::numbers::pi / dt));
  double worst = 0.0;
  for (int k = 1; k <= steps; ++k) {
    wf = step_schrodinger(wf, v, kQm, dt);
    if (k % 25 == 0) worst = std::max(worst, std::abs(mean_x(wf) - std::cos(wf.time)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("Crank-Nicolson is second order in time") {
  const auto g = Grid1D::make(-10.0, 10.0, 801);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto wf0 = init_state(g, GaussianState{1.0, 0.6, 0.8}, kQm);
  auto run = [&](double dt) {
    const int steps = static_cast<int>(std::round(1.0 / dt));
    return evolve(wf0, dt, steps, [&](const WaveField& w, double h) {
      return step_schrodinger(w, v, kQm, h);
    });
  };
  const double dt = 0.02;
  const auto coarse = run(dt);
  const auto fine = run(dt / 2);
  const auto ref = run(dt / 8);
  const double ratio = l2_diff(coarse, ref) / l2_diff(fine, ref);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("norm conservation for all steppers") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto wf0 = init_state(g, GaussianState{1.0, 0.6, 0.5}, kQm);
  SvmParams damped = kQm;
  damped.gamma = 0.3;
  const double dt = 0.01;
  const int steps = 100;  // one unit of time
  const auto a = evolve(wf0, dt, steps, [&](const WaveField& w, double h) {
    return step_schrodinger(w, v, kQm, h);
  });
  const auto b = evolve(wf0, dt, steps, [&](const WaveField& w, double h) {
    return step_kostin(w, v, damped, h);
  });
  const auto c = evolve(wf0, dt, steps, [&](const WaveField& w, double h) {
    return step_kanai(w, v, damped, h);
  });
  CHECK(std::abs(a.norm() - 1.0) < 1e-8);
  CHECK(std::abs(b.norm() - 1.0) < 1e-8);
  CHECK(std::abs(c.norm() - 1.0) < 1e-8);
}

TEST_CASE("step_kostin reduces to Schrodinger at gamma = 0") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  WaveField a = init_state(g, GaussianState{1.0, 0.6, 0.5}, kQm);
  WaveField b = a;
  for (int k = 0; k < 20; ++k) {
    a = step_schrodinger(a, v, kQm, 0.01);
    b = step_kostin(b, v, kQm, 0.01);
    CHECK(max_abs_diff(a.psi, b.psi) < 1e-12);
  }
}

TEST_CASE("step_kostin keeps the ground state stationary") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  SvmParams p = kQm;
  p.gamma = 0.2;
  const auto wf0 = init_state(g, HarmonicGround{1.0}, p);
  const auto wf = evolve(wf0, 0.01, static_cast<int>(2.0 * std::numbers::pi / 0.01),
                         [&](const WaveField& w, double h) { return step_kostin(w, v, p, h); });
  double dev = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    dev = std::max(dev, std::abs(std::norm(wf.psi[i]) - std::norm(wf0.psi[i])));
  }
  CHECK(dev < 1e-8);
}

TEST_CASE("step_kostin relaxes a coherent state toward the ground energy") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  SvmParams p = kQm;
  p.gamma = 0.2;
  auto run = [&](double dt, std::vector<double>* energies) {
    WaveField wf = init_state(g, HarmonicCoherent{1.0, 1.0}, p);
    const int steps = static_cast<int>(std::round(10.0 / dt));
    const int every = static_cast<int>(std::round(0.1 / dt));
    for (int k = 1; k <= steps; ++k) {
      wf = step_kostin(wf, v, p, dt);
      if (energies && k % every == 0) energies->push_back(energy(wf, v, p));
    }
    return wf;
  };
  std::vector<double> e;
  const auto wf = run(0.01, &e);
  for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] <= e[k - 1] + 1e-12);
  const double e0 = energy(init_state(g, HarmonicCoherent{1.0, 1.0}, p), v, p);
  CHECK(e.back() < e0);
  CHECK(e.back() > 0.49);
  // Classical damped oscillator energy: the excess decays roughly like e^{-gamma t}.
  CHECK(e.back() - 0.5 < 0.5 * (e0 - 0.5));
  // Halved-dt cross-check of the curve.
  const auto wf_half = run(0.005, nullptr);
  CHECK(std::abs(energy(wf_half, v, p) - energy(wf, v, p)) < 1e-5);
}

TEST_CASE("step_kanai reduces to Schrodinger at gamma = 0") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  WaveField a = init_state(g, GaussianState{1.0, 0.6, 0.5}, kQm);
  WaveField b = a;
  for (int k = 0; k < 20; ++k) {
    a = step_schrodinger(a, v, kQm, 0.01);
    b = step_kanai(b, v, kQm, 0.01);
    CHECK(max_abs_diff(a.psi, b.psi) < 1e-12);
  }
}

TEST_CASE("step_kanai: Kennard holds for the Kanai momentum, physical product decays") {
  const auto g = Grid1D::make(-10.0, 10.0, 2001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  SvmParams p = kQm;
  p.gamma = 0.2;
  WaveField wf = init_state(g, HarmonicCoherent{1.0, 1.0}, p);
  const double dt = 0.005;
  double last_phys = 1.0;
  for (int k = 1; k <= 3000; ++k) {  // t = 15, gamma t = 3
    wf = step_kanai(wf, v, p, dt);
    if (k % 100 == 0) {
      const auto m = operator_moments(wf, p.hbar);
      CHECK(m.delta_x() * m.delta_p() >= 0.5 * (1.0 - 1e-6));
      last_phys = m.delta_x() * m.delta_p() * std::exp(-p.gamma * wf.time);
    }
  }
  CHECK(last_phys < 0.45);
}

TEST_CASE("phase_field") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  auto wf = init_state(g, GaussianState{0.0, 1.0, 0.0}, kQm);
  for (double th : phase_field(wf)) CHECK(th == 0.0);

  const double k = 1.7;
  wf = init_state(g, GaussianState{0.0, 1.0, k}, kQm);
  const auto theta = phase_field(wf);
  const std::size_t mid = g.n_points / 2;
  const auto rho = wf.density();
  for (std::size_t i = 0; i < g.n_points; ++i) {
    if (rho[i] > 1e-12 * rho[mid]) {
      CHECK(std::abs(theta[i] - theta[mid] - k * (g.x(i) - g.x(mid))) < 1e-8);
    }
  }

  // Two separated lumps.
  WaveField two = wf;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    two.psi[i] = std::exp(-4.0 * (x - 5.0) * (x - 5.0)) + std::exp(-4.0 * (x + 5.0) * (x + 5.0));
  }
  two.psi.front() = two.psi.back() = 0.0;
  CHECK_THROWS_AS(phase_field(two), DisconnectedSupport);
  SvmParams p = kQm;
  p.gamma = 0.1;
  CHECK_THROWS_AS(step_kostin(two, Potential::free(g), p, 0.01), PhaseUndefined);
}

TEST_CASE("Kostin phase potential has zero density-weighted mean") {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto wf = init_state(g, GaussianState{0.5, 0.8, 1.2}, kQm);
  const auto theta = phase_field(wf);
  const double mean = density_mean(wf, theta);
  std::vector<double> vk(theta.size());
  const double gamma = 0.3;
  for (std::size_t i = 0; i < theta.size(); ++i) vk[i] = kQm.hbar * gamma * (theta[i] - mean);
  CHECK(std::abs(density_mean(wf, vk)) < 1e-10);
}

TEST_CASE("operator moments of a boosted Gaussian") {
  const auto g = Grid1D::make(-15.0, 15.0, 3001);
  const double k = 0.9, sigma = 0.7;
  const auto wf = init_state(g, GaussianState{0.3, sigma, k}, kQm);
  const auto m = operator_moments(wf, 1.0);
  CHECK(m.x_mean == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(m.delta_x() == doctest::Approx(sigma).epsilon(1e-10));
  CHECK(m.p_mean == doctest::Approx(k).epsilon(1e-8));
  CHECK(m.delta_p() == doctest::Approx(1.0 / (2.0 * sigma)).epsilon(1e-8));
}
