#include "svm/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "detail.hpp"
#include "svm/errors.hpp"

namespace svm {

namespace detail {

SupportMask support_mask(std::span<const double> rho, double floor_rel) {
  SupportMask mask;
  const std::size_t n = rho.size();
  mask.in.assign(n, 0);
  const double peak = *std::max_element(rho.begin(), rho.end());
  const double floor_abs = floor_rel * peak;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (rho[j] > floor_abs && rho[j - 1] > 0.0 && rho[j + 1] > 0.0) {
      mask.in[j] = 1;
      if (mask.empty) mask.first = j;
      mask.last = j;
      mask.empty = false;
    }
  }
  if (!mask.empty) {
    for (std::size_t j = mask.first; j <= mask.last; ++j) {
      if (!mask.in[j]) {
        mask.connected = false;
        break;
      }
    }
  }
  return mask;
}

void clamp_to_support(std::vector<double>& v, const SupportMask& mask) {
  if (mask.empty) return;
  for (std::size_t j = 0; j < mask.first; ++j) v[j] = v[mask.first];
  for (std::size_t j = mask.last + 1; j < v.size(); ++j) v[j] = v[mask.last];
  // Interior holes (disconnected support): carry the last in-support value.
  for (std::size_t j = mask.first; j <= mask.last; ++j) {
    if (!mask.in[j]) v[j] = v[j - 1];
  }
}

}  // namespace detail

namespace {

// One Crank-Nicolson step for H = -c d_xx + scale * V on the interior nodes.
std::vector<cplx> crank_nicolson(std::span<const cplx> psi, double dx, double c,
                                 std::span<const double> v, double v_scale,
                                 double hbar, double dt) {
  const std::size_t n = psi.size();
  const std::size_t m = n - 2;
  const cplx half_i(0.0, 0.5 * dt / hbar);
  const double off_h = -c / (dx * dx);
  const double diag_kin = 2.0 * c / (dx * dx);

  std::vector<cplx> diag(m);
  std::vector<cplx> rhs(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + 1;
    const double h_jj = diag_kin + v_scale * v[j];
    diag[k] = 1.0 + half_i * h_jj;
    rhs[k] = (1.0 - half_i * h_jj) * psi[j] - half_i * off_h * (psi[j - 1] + psi[j + 1]);
  }
  const cplx off = half_i * off_h;
  detail::solve_tridiagonal_constant<cplx>(diag, off, rhs);

  std::vector<cplx> out(n, cplx(0.0, 0.0));
  std::copy(rhs.begin(), rhs.end(), out.begin() + 1);
  return out;
}

void check_step(const WaveField& state, const Potential& potential, double dt) {
  if (!(dt > 0.0)) throw InvalidParameters("dt must be > 0");
  if (potential.values.size() != state.psi.size()) {
    throw InvalidParameters("potential and state sizes differ");
  }
}

void finish_boundaries_and_normalize(WaveField& wf) {
  wf.psi.front() = 0.0;
  wf.psi.back() = 0.0;
  const double nrm = std::sqrt(wf.norm());
  for (auto& z : wf.psi) z /= nrm;
}

void check_boundary_amplitude(double left, double right) {
  constexpr double kMaxBoundaryAmplitude = 1e-10;
  if (left > kMaxBoundaryAmplitude || right > kMaxBoundaryAmplitude) {
    throw BoxTooSmall("boundary amplitude " + std::to_string(std::max(left, right)) +
                      " exceeds 1e-10");
  }
}

WaveField gaussian(const Grid1D& grid, double center, double width, double k) {
  if (!(width > 0.0)) throw InvalidParameters("gaussian width must be > 0");
  auto amplitude = [&](double x) {
    const double d = x - center;
    return std::exp(-d * d / (4.0 * width * width));
  };
  const double pref = std::pow(2.0 * std::numbers::pi * width * width, -0.25);
  check_boundary_amplitude(pref * amplitude(grid.x_min), pref * amplitude(grid.x_max));
  WaveField wf{grid, std::vector<cplx>(grid.n_points), 0.0};
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    wf.psi[i] = pref * amplitude(x) * std::polar(1.0, k * x);
  }
  finish_boundaries_and_normalize(wf);
  return wf;
}

WaveField harmonic_ground(const Grid1D& grid, double omega, const SvmParams& params) {
  if (!(omega > 0.0)) throw InvalidParameters("omega must be > 0");
  const double m = params.mass;
  const double hbar = params.hbar;
  const double width = std::sqrt(hbar / (2.0 * m * omega));
  WaveField wf = gaussian(grid, 0.0, width, 0.0);

  // Inverse iteration on the discrete Hamiltonian, shifted below E0 = hbar w/2.
  const Potential v = Potential::harmonic(grid, omega, m);
  const double dx = grid.dx();
  const std::size_t n = grid.n_points;
  const double c = hbar * hbar / (2.0 * m);
  const double shift = 0.25 * hbar * omega;
  std::vector<double> diag(n - 2);
  for (std::size_t k = 0; k < n - 2; ++k) diag[k] = 2.0 * c / (dx * dx) + v.values[k + 1] - shift;
  const double off = -c / (dx * dx);

  std::vector<double> phi(n - 2);
  for (std::size_t k = 0; k < n - 2; ++k) phi[k] = wf.psi[k + 1].real();
  for (int it = 0; it < 80; ++it) {
    detail::solve_tridiagonal_constant<double>(diag, off, phi);
    double s = 0.0;
    for (double p : phi) s += p * p;
    const double inv = 1.0 / std::sqrt(s);
    for (double& p : phi) p *= inv;
  }
  for (std::size_t k = 0; k < n - 2; ++k) wf.psi[k + 1] = std::abs(phi[k]);
  finish_boundaries_and_normalize(wf);
  return wf;
}

}  // namespace

std::vector<double> WaveField::density() const {
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return rho;
}

double WaveField::norm() const { return trapezoid(density(), grid.dx()); }

WaveField init_state(const Grid1D& grid, const InitialState& kind,
                     const SvmParams& params) {
  params.validate();
  return std::visit(
      [&](const auto& s) -> WaveField {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianState>) {
          return gaussian(grid, s.center, s.width, s.wavenumber);
        } else if constexpr (std::is_same_v<T, HarmonicGround>) {
          return harmonic_ground(grid, s.omega, params);
        } else {
          if (!(s.omega > 0.0)) throw InvalidParameters("omega must be > 0");
          const double width = std::sqrt(params.hbar / (2.0 * params.mass * s.omega));
          return gaussian(grid, s.displacement, width, 0.0);
        }
      },
      kind);
}

WaveField step_schrodinger(const WaveField& state, const Potential& potential,
                           const SvmParams& params, double dt) {
  params.require_quantum_point("step_schrodinger");
  check_step(state, potential, dt);
  const double c = params.hbar * params.hbar / (2.0 * params.mass);
  return {state.grid,
          crank_nicolson(state.psi, state.grid.dx(), c, potential.values, 1.0,
                         params.hbar, dt),
          state.time + dt};
}

namespace {

void kostin_phase_flow(WaveField& wf, double gamma, double h, double rho_floor) {
  std::vector<double> theta;
  try {
    theta = phase_field(wf, rho_floor);
  } catch (const DisconnectedSupport& e) {
    throw PhaseUndefined(e.what());
  }
  const double mean = density_mean(wf, theta);
  const double factor = std::expm1(-gamma * h);
  for (std::size_t j = 0; j < wf.psi.size(); ++j) {
    wf.psi[j] *= std::polar(1.0, (theta[j] - mean) * factor);
  }
}

}  // namespace

WaveField step_kostin(const WaveField& state, const Potential& potential,
                      const SvmParams& params, double dt, double rho_floor) {
  params.require_quantum_point("step_kostin");
  check_step(state, potential, dt);
  WaveField wf = state;
  const bool damped = params.gamma > 0.0;
  if (damped) kostin_phase_flow(wf, params.gamma, 0.5 * dt, rho_floor);
  const double c = params.hbar * params.hbar / (2.0 * params.mass);
  wf.psi = crank_nicolson(wf.psi, wf.grid.dx(), c, potential.values, 1.0, params.hbar, dt);
  if (damped) kostin_phase_flow(wf, params.gamma, 0.5 * dt, rho_floor);
  wf.time = state.time + dt;
  return wf;
}

WaveField step_kanai(const WaveField& state, const Potential& potential,
                     const SvmParams& params, double dt) {
  params.validate();
  check_step(state, potential, dt);
  const double t_mid = state.time + 0.5 * dt;
  const double growth = std::exp(params.gamma * t_mid);
  const double c = params.hbar * params.hbar / (2.0 * params.mass) / growth;
  return {state.grid,
          crank_nicolson(state.psi, state.grid.dx(), c, potential.values, growth,
                         params.hbar, dt),
          state.time + dt};
}

std::vector<double> phase_field(const WaveField& state, double rho_floor) {
  const std::vector<double> rho = state.density();
  const auto mask = detail::support_mask(rho, rho_floor);
  const std::size_t n = rho.size();
  std::vector<double> theta(n, 0.0);
  if (mask.empty) return theta;
  if (!mask.connected) {
    throw DisconnectedSupport("density support splits into separate regions");
  }
  const double dx = state.grid.dx();
  std::vector<double> grad(n, 0.0);
  for (std::size_t j = mask.first; j <= mask.last; ++j) {
    grad[j] = std::arg(std::conj(state.psi[j - 1]) * state.psi[j + 1]) / (2.0 * dx);
  }
  std::size_t peak = mask.first;
  for (std::size_t j = mask.first; j <= mask.last; ++j) {
    if (rho[j] > rho[peak]) peak = j;
  }
  theta[peak] = std::arg(state.psi[peak]);
  for (std::size_t j = peak + 1; j <= mask.last; ++j) {
    theta[j] = theta[j - 1] + 0.5 * dx * (grad[j - 1] + grad[j]);
  }
  for (std::size_t j = peak; j-- > mask.first;) {
    theta[j] = theta[j + 1] - 0.5 * dx * (grad[j] + grad[j + 1]);
  }
  detail::clamp_to_support(theta, mask);
  return theta;
}

double density_mean(const WaveField& state, std::span<const double> field) {
  const std::vector<double> rho = state.density();
  std::vector<double> w(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) w[j] = rho[j] * field[j];
  const double dx = state.grid.dx();
  return trapezoid(w, dx) / trapezoid(rho, dx);
}

double energy(const WaveField& state, const Potential& potential,
              const SvmParams& params) {
  const double dx = state.grid.dx();
  double kin = 0.0;
  double pot = 0.0;
  for (std::size_t j = 0; j + 1 < state.psi.size(); ++j) {
    kin += std::norm(state.psi[j + 1] - state.psi[j]);
  }
  const std::vector<double> rho = state.density();
  for (std::size_t j = 0; j < rho.size(); ++j) pot += potential.values[j] * rho[j];
  const double c = params.hbar * params.hbar / (2.0 * params.mass);
  return (c * kin / dx + pot * dx) / state.norm();
}

double OperatorMoments::delta_x() const {
  return std::sqrt(std::max(0.0, x2 - x_mean * x_mean));
}

double OperatorMoments::delta_p() const {
  return std::sqrt(std::max(0.0, p2 - p_mean * p_mean));
}

OperatorMoments operator_moments(const WaveField& state, double hbar) {
  static constexpr double kCoef[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  const auto& psi = state.psi;
  const std::size_t n = psi.size();
  const double dx = state.grid.dx();
  auto at = [&](std::ptrdiff_t j) -> cplx {
    return (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) ? cplx(0.0, 0.0) : psi[j];
  };
  double norm = 0.0, x1 = 0.0, x2 = 0.0, p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::ptrdiff_t>(i);
    cplx d(0.0, 0.0);
    for (int k = 1; k <= 3; ++k) d += kCoef[k - 1] * (at(j + k) - at(j - k));
    d /= dx;
    const double rho = std::norm(psi[i]);
    const double x = state.grid.x(i);
    norm += rho;
    x1 += x * rho;
    x2 += x * x * rho;
    p1 += std::imag(std::conj(psi[i]) * d);
    p2 += std::norm(d);
  }
  OperatorMoments m;
  m.norm = norm * dx;
  m.x_mean = x1 / norm;
  m.x2 = x2 / norm;
  m.p_mean = hbar * p1 / norm;
  m.p2 = hbar * hbar * p2 / norm;
  return m;
}

}  // namespace svm
