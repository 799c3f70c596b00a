#include "svm/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "detail.hpp"
#include "svm/csv.hpp"
#include "svm/errors.hpp"

namespace svm {

double FluidState::total_mass() const { return trapezoid(rho, grid.dx()); }

FluidState fluid_from_drifts(const Grid1D& grid, const DriftSlice& slice) {
  return {grid, slice.rho, slice.u_m, slice.time};
}

BarotropicEos BarotropicEos::quantum_only() { return {}; }

BarotropicEos BarotropicEos::polytrope(double k, double n) {
  if (n == 1.0) throw InvalidParameters("polytrope exponent n = 1 is degenerate");
  BarotropicEos e;
  e.kind = Kind::polytrope;
  e.k = k;
  e.n = n;
  return e;
}

BarotropicEos BarotropicEos::table(std::vector<double> rho, std::vector<double> eps) {
  if (rho.size() < 3 || rho.size() != eps.size()) {
    throw InvalidParameters("eos table needs >= 3 matching (rho, eps) samples");
  }
  for (std::size_t i = 1; i < rho.size(); ++i) {
    if (!(rho[i] > rho[i - 1])) throw InvalidParameters("eos table rho must increase");
  }
  BarotropicEos e;
  e.kind = Kind::table;
  e.rho_table = std::move(rho);
  e.eps_table = std::move(eps);
  return e;
}

namespace {

// Node slopes of the tabulated eps(rho): centered differences inside,
// one-sided at the ends.
double table_slope(const BarotropicEos& e, std::size_t i) {
  const auto& r = e.rho_table;
  const auto& f = e.eps_table;
  const std::size_t n = r.size();
  if (i == 0) return (f[1] - f[0]) / (r[1] - r[0]);
  if (i == n - 1) return (f[n - 1] - f[n - 2]) / (r[n - 1] - r[n - 2]);
  return (f[i + 1] - f[i - 1]) / (r[i + 1] - r[i - 1]);
}

struct HermiteEval {
  double value;
  double slope;
};

HermiteEval table_eval(const BarotropicEos& e, double rho) {
  const auto& r = e.rho_table;
  if (rho < r.front() || rho > r.back()) {
    throw EosRangeError("rho = " + std::to_string(rho) + " outside tabulated range");
  }
  auto it = std::upper_bound(r.begin(), r.end(), rho);
  std::size_t i = it == r.end() ? r.size() - 2
                                : static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                                      0, (it - r.begin()) - 1));
  i = std::min(i, r.size() - 2);
  const double h = r[i + 1] - r[i];
  const double s = (rho - r[i]) / h;
  const double f0 = e.eps_table[i], f1 = e.eps_table[i + 1];
  const double m0 = table_slope(e, i) * h, m1 = table_slope(e, i + 1) * h;
  const double s2 = s * s, s3 = s2 * s;
  const double value = (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * m0 +
                       (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * m1;
  const double dvalue = (6 * s2 - 6 * s) * f0 + (3 * s2 - 4 * s + 1) * m0 +
                        (-6 * s2 + 6 * s) * f1 + (3 * s2 - 2 * s) * m1;
  return {value, dvalue / h};
}

}  // namespace

double BarotropicEos::energy_density(double rho) const {
  switch (kind) {
    case Kind::quantum_only:
      return 0.0;
    case Kind::polytrope:
      return k * std::pow(rho, n) / (n - 1.0);
    case Kind::table:
      return table_eval(*this, rho).value;
  }
  return 0.0;
}

double BarotropicEos::pressure(double rho) const {
  switch (kind) {
    case Kind::quantum_only:
      return 0.0;
    case Kind::polytrope:
      return k * std::pow(rho, n);
    case Kind::table: {
      const auto h = table_eval(*this, rho);
      return rho * h.slope - h.value;
    }
  }
  return 0.0;
}

std::vector<double> pressure(const BarotropicEos& eos, std::span<const double> rho) {
  std::vector<double> p(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) p[i] = eos.pressure(rho[i]);
  return p;
}

namespace {

struct Rates {
  std::vector<double> drho;
  std::vector<double> du;
};

// Bohm term d_xx sqrt(rho) / sqrt(rho), evaluated where the node and both
// neighbours lie above the vacuum floor.
struct BohmTerm {
  std::vector<double> q;
  std::vector<char> valid;
};

BohmTerm bohm_term(std::span<const double> rho, double dx, double floor_abs) {
  const std::size_t n = rho.size();
  BohmTerm b{std::vector<double>(n, 0.0), std::vector<char>(n, 0)};
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (rho[j - 1] > floor_abs && rho[j] > floor_abs && rho[j + 1] > floor_abs) {
      const double am = std::sqrt(rho[j - 1]), a = std::sqrt(rho[j]), ap = std::sqrt(rho[j + 1]);
      b.q[j] = (ap - 2.0 * a + am) / (dx * dx * a);
      b.valid[j] = 1;
    }
  }
  return b;
}

// Momentum-equation forces excluding the time derivative and advection.
// Nodes whose stencil reaches into the vacuum are inactive and keep their
// velocity.
struct Forces {
  std::vector<double> f;
  std::vector<char> active;
};

Forces forces(std::span<const double> rho, std::span<const double> u,
                           double dx, const HydroForcing& forcing,
                           const TransportCoefficients& tc, const SvmParams& params,
                           double floor_abs) {
  const std::size_t n = rho.size();
  Forces out{std::vector<double>(n, 0.0), std::vector<char>(n, 0)};
  const auto bohm = bohm_term(rho, dx, floor_abs);
  const auto& q = bohm.q;
  std::vector<double> p;
  if (forcing.form == FluidForm::continuum) p = pressure(forcing.eos, rho);
  const bool has_v = !forcing.potential.empty();
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (rho[j] <= floor_abs) continue;
    if (tc.kappa != 0.0 && !(bohm.valid[j - 1] && bohm.valid[j + 1])) continue;
    out.active[j] = 1;
    const double rj = rho[j];
    double visc;
    if (forcing.form == FluidForm::particle) {
      visc = 2.0 * tc.mu * (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
    } else {
      const double rp = 0.5 * (rho[j + 1] + rho[j]);
      const double rm = 0.5 * (rho[j] + rho[j - 1]);
      visc = 2.0 * tc.mu * (rp * (u[j + 1] - u[j]) - rm * (u[j] - u[j - 1])) / (dx * dx * rj);
    }
    double fj = visc + 2.0 * tc.kappa * (q[j + 1] - q[j - 1]) / (2.0 * dx);
    if (has_v) {
      fj -= (forcing.potential[j + 1] - forcing.potential[j - 1]) / (2.0 * dx * params.mass);
    }
    if (forcing.form == FluidForm::continuum) fj -= (p[j + 1] - p[j - 1]) / (2.0 * dx * rj);
    fj -= params.gamma * u[j];
    out.f[j] = fj;
  }
  return out;
}

Rates rates(std::span<const double> rho, std::span<const double> u, double dx,
            const HydroForcing& forcing, const TransportCoefficients& tc,
            const SvmParams& params, double floor_abs) {
  const std::size_t n = rho.size();
  auto f = forces(rho, u, dx, forcing, tc, params, floor_abs);
  Rates r{std::vector<double>(n, 0.0), std::move(f.f)};
  for (std::size_t j = 1; j + 1 < n; ++j) {
    r.drho[j] = -(rho[j + 1] * u[j + 1] - rho[j - 1] * u[j - 1]) / (2.0 * dx);
    if (f.active[j]) r.du[j] -= u[j] * (u[j + 1] - u[j - 1]) / (2.0 * dx);
  }
  return r;
}

// Undershoots no deeper than the vacuum floor are reset to zero.
void check_fluid(std::vector<double>& rho, const std::vector<double>& u, double floor_abs) {
  for (std::size_t j = 0; j < rho.size(); ++j) {
    if (!std::isfinite(rho[j]) || !std::isfinite(u[j])) {
      throw NumericalFailure("non-finite fluid state at node " + std::to_string(j));
    }
    if (rho[j] < 0.0 && rho[j] >= -floor_abs) rho[j] = 0.0;
    if (rho[j] < 0.0) {
      throw NegativeDensity("rho = " + std::to_string(rho[j]) + " at node " +
                            std::to_string(j));
    }
  }
}

}  // namespace

double hydro_dt_limit(const FluidState& state, const TransportCoefficients& transport,
                      const SvmParams& params) {
  const double dx = state.grid.dx();
  double umax = 0.0;
  for (double u : state.u_m) umax = std::max(umax, std::abs(u));
  const double diff = std::max({transport.mu, std::sqrt(transport.kappa), params.nu});
  double limit = 0.25 * dx * dx / diff;
  if (umax > 0.0) limit = std::min(limit, 0.5 * dx / umax);
  return limit;
}

FluidState step_hydro(const FluidState& state, const HydroForcing& forcing,
                      const TransportCoefficients& transport, const SvmParams& params,
                      double dt, double rho_floor) {
  if (!(dt > 0.0)) throw InvalidParameters("dt must be > 0");
  const std::size_t n = state.rho.size();
  if (state.u_m.size() != n || n != state.grid.n_points) {
    throw InvalidParameters("fluid state arrays do not match the grid");
  }
  if (!forcing.potential.empty() && forcing.potential.size() != n) {
    throw InvalidParameters("potential table length differs from grid");
  }
  const double limit = hydro_dt_limit(state, transport, params);
  if (dt > limit) {
    throw CflViolation("dt = " + std::to_string(dt) + " exceeds limit " + std::to_string(limit));
  }
  const double dx = state.grid.dx();
  const double peak = *std::max_element(state.rho.begin(), state.rho.end());
  const double floor_abs = rho_floor * peak;

  const Rates k1 = rates(state.rho, state.u_m, dx, forcing, transport, params, floor_abs);
  std::vector<double> rho1(state.rho), u1(state.u_m);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    rho1[j] += dt * k1.drho[j];
    u1[j] += dt * k1.du[j];
  }
  check_fluid(rho1, u1, floor_abs);
  const Rates k2 = rates(rho1, u1, dx, forcing, transport, params, floor_abs);
  FluidState out{state.grid, state.rho, state.u_m, state.time + dt};
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out.rho[j] += 0.5 * dt * (k1.drho[j] + k2.drho[j]);
    out.u_m[j] += 0.5 * dt * (k1.du[j] + k2.du[j]);
  }
  check_fluid(out.rho, out.u_m, floor_abs);
  return out;
}

NewtonResidualReport newton_residual(std::span<const DriftSlice> slices, const Grid1D& grid,
                                     std::span<const double> potential,
                                     const TransportCoefficients& transport,
                                     const SvmParams& params, FluidForm form,
                                     const BarotropicEos& eos, double rho_floor) {
  if (slices.size() < 3) {
    throw InsufficientSlices("need at least 3 consecutive slices, got " +
                             std::to_string(slices.size()));
  }
  const std::size_t n = grid.n_points;
  const double dx = grid.dx();
  HydroForcing forcing;
  forcing.form = form;
  forcing.eos = eos;
  forcing.potential.assign(potential.begin(), potential.end());

  NewtonResidualReport report;
  double sum_sq = 0.0;
  for (std::size_t k = 1; k + 1 < slices.size(); ++k) {
    const auto& prev = slices[k - 1];
    const auto& cur = slices[k];
    const auto& next = slices[k + 1];
    const double peak = *std::max_element(cur.rho.begin(), cur.rho.end());
    const auto mask = detail::support_mask(cur.rho, rho_floor);
    const auto f = forces(cur.rho, cur.u_m, dx, forcing, transport, params, rho_floor * peak);
    NewtonResidual r;
    r.time = cur.time;
    r.residual.assign(n, 0.0);
    const double two_dt = next.time - prev.time;
    double wsum = 0.0, wres = 0.0;
    for (std::size_t j = 2; j + 2 < n; ++j) {
      if (!mask.in[j] || !f.active[j]) continue;
      const double dudt = (next.u_m[j] - prev.u_m[j]) / two_dt;
      const double adv = cur.u_m[j] * (cur.u_m[j + 1] - cur.u_m[j - 1]) / (2.0 * dx);
      r.residual[j] = dudt + adv - f.f[j];
      wsum += cur.rho[j];
      wres += cur.rho[j] * r.residual[j] * r.residual[j];
    }
    r.weighted_l2 = wsum > 0.0 ? std::sqrt(wres / wsum) : 0.0;
    sum_sq += r.weighted_l2 * r.weighted_l2;
    report.slices.push_back(std::move(r));
  }
  report.weighted_l2 = std::sqrt(sum_sq / static_cast<double>(report.slices.size()));
  return report;
}

void write_hydro_csv(std::ostream& out, std::span<const FluidState> states,
                     std::span<const NewtonResidual> residuals) {
  CsvWriter csv(out);
  csv.header({"t", "x", "rho", "u_m", "residual"});
  for (const auto& s : states) {
    const NewtonResidual* res = nullptr;
    for (const auto& r : residuals) {
      if (r.time == s.time) res = &r;
    }
    for (std::size_t i = 0; i < s.grid.n_points; ++i) {
      csv.row(s.time, s.grid.x(i), s.rho[i], s.u_m[i], res ? res->residual[i] : 0.0);
    }
  }
}

}  // namespace svm
