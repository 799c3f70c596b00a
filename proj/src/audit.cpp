#include "svm/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "svm/csv.hpp"
#include "svm/errors.hpp"

namespace svm {

namespace {

struct Weighted {
  double mass = 0.0;

  double mean(std::span<const double> rho, std::span<const double> f, double dx) const {
    std::vector<double> g(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) g[i] = rho[i] * f[i];
    return trapezoid(g, dx) / mass;
  }
};

double momentum_scale(const SvmParams& params, double t) {
  return params.gamma > 0.0 ? std::exp(params.gamma * t) : 1.0;
}

void require_regular(const SvmParams& params) {
  if (is_singular(params)) {
    throw SingularKineticMatrix("det M = " + format_double(det_m(params)) +
                                "; momenta are undefined");
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double cov_of(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size());
}

}  // namespace

const char* to_string(Source s) { return s == Source::grid ? "grid" : "ensemble"; }

double delta_x(const Grid1D& grid, std::span<const double> rho) {
  const auto x = grid.coordinates();
  const Weighted w{trapezoid(rho, grid.dx())};
  const double mean = w.mean(rho, x, grid.dx());
  std::vector<double> d2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d2[i] = (x[i] - mean) * (x[i] - mean);
  return std::sqrt(std::max(0.0, w.mean(rho, d2, grid.dx())));
}

double delta_x(std::span<const double> samples) { return std::sqrt(var_of(samples)); }

double delta_p(const Grid1D& grid, const DriftSlice& slice, const SvmParams& params) {
  require_regular(params);
  const auto km = build_matrix(params);
  const double s = 2.0 * params.mass * momentum_scale(params, slice.time);
  const std::size_t n = grid.n_points;
  std::vector<double> p(n), q(n), p2(n), q2(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = s * (km.entries[0][0] * slice.u_fwd[i] + km.entries[0][1] * slice.u_bwd[i]);
    q[i] = s * (km.entries[1][0] * slice.u_fwd[i] + km.entries[1][1] * slice.u_bwd[i]);
  }
  const Weighted w{trapezoid(slice.rho, grid.dx())};
  const double mp = w.mean(slice.rho, p, grid.dx()), mq = w.mean(slice.rho, q, grid.dx());
  for (std::size_t i = 0; i < n; ++i) {
    p2[i] = (p[i] - mp) * (p[i] - mp);
    q2[i] = (q[i] - mq) * (q[i] - mq);
  }
  const double vp = w.mean(slice.rho, p2, grid.dx()), vq = w.mean(slice.rho, q2, grid.dx());
  return std::sqrt(0.5 * (vp + vq));
}

double delta_p(std::span<const double> p, std::span<const double> pbar) {
  return std::sqrt(0.5 * (var_of(p) + var_of(pbar)));
}

double correlation_term(const Grid1D& grid, const DriftSlice& slice, const SvmParams& params) {
  const auto x = grid.coordinates();
  const Weighted w{trapezoid(slice.rho, grid.dx())};
  const double mx = w.mean(slice.rho, x, grid.dx());
  const double mu = w.mean(slice.rho, slice.u_m, grid.dx());
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = (x[i] - mx) * (slice.u_m[i] - mu);
  return params.mass * w.mean(slice.rho, c, grid.dx());
}

double correlation_term(std::span<const double> r, std::span<const double> u_m,
                        const SvmParams& params) {
  return params.mass * cov_of(r, u_m);
}

namespace {

void fill_bounds(UncertaintyRow& row, const SvmParams& params) {
  const double scale = momentum_scale(params, row.t);
  row.bound_simple = scale * uncertainty_lower_bound(params);
  row.bound_full = scale * uncertainty_bound_full(params, row.corr);
}

void fill_products(UncertaintyRow& row, const SvmParams& params) {
  row.delta_p_phys = row.delta_p / momentum_scale(params, row.t);
  row.product = row.delta_x * row.delta_p;
  row.product_phys = row.delta_x * row.delta_p_phys;
}

void mark_undefined(UncertaintyRow& row) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  row.momenta_defined = false;
  row.delta_p = row.delta_p_phys = row.product = row.product_phys = nan;
}

}  // namespace

UncertaintyReport grid_report(const DriftTable& table, const SvmParams& params) {
  UncertaintyReport rep{Source::grid, {}};
  const bool singular = is_singular(params);
  for (const auto& slice : table.slices) {
    UncertaintyRow row;
    row.t = slice.time;
    row.delta_x = delta_x(table.grid, slice.rho);
    row.corr = correlation_term(table.grid, slice, params);
    fill_bounds(row, params);
    if (singular) {
      mark_undefined(row);
    } else {
      row.delta_p = delta_p(table.grid, slice, params);
      fill_products(row, params);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

UncertaintyReport ensemble_report(const TrajectoryEnsemble& ens, const Momenta& mom,
                                  const DriftTable& table, const SvmParams& params,
                                  std::size_t batches) {
  if (batches < 2 || batches > ens.n_traj) {
    throw InvalidParameters("batch count must lie in [2, n_traj]");
  }
  UncertaintyReport rep{Source::ensemble, {}};
  const bool singular = is_singular(params);
  const std::size_t n = ens.n_traj;
  std::vector<double> um(n);
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    const auto r = ens.at(k);
    const auto& slice = table.nearest(ens.times[k]);
    for (std::size_t i = 0; i < n; ++i) um[i] = interpolate(table.grid, slice.u_m, r[i]);
    UncertaintyRow row;
    row.t = ens.times[k];
    row.delta_x = delta_x(r);
    row.corr = correlation_term(r, um, params);
    fill_bounds(row, params);
    if (singular) {
      mark_undefined(row);
      rep.rows.push_back(row);
      continue;
    }
    const std::span<const double> p(mom.p.data() + k * n, n), q(mom.pbar.data() + k * n, n);
    row.delta_p = delta_p(p, q);
    fill_products(row, params);
    std::vector<double> prods;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = n * b / batches, hi = n * (b + 1) / batches;
      prods.push_back(delta_x(r.subspan(lo, hi - lo)) *
                      delta_p(p.subspan(lo, hi - lo), q.subspan(lo, hi - lo)));
    }
    row.product_se = std::sqrt(var_of(prods) * static_cast<double>(batches) /
                               static_cast<double>(batches - 1) / static_cast<double>(batches));
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<InequalityCheck> verify_inequality(const UncertaintyReport& report) {
  std::vector<InequalityCheck> out;
  for (const auto& row : report.rows) {
    InequalityCheck c;
    c.t = row.t;
    if (!row.momenta_defined) {
      c.holds = true;
      out.push_back(c);
      continue;
    }
    c.slack = report.source == Source::ensemble ? 3.0 * row.product_se : 1e-6 * row.bound_full;
    c.margin = row.product - row.bound_full;
    c.holds = c.margin >= -c.slack && row.bound_full >= row.bound_simple * (1.0 - 1e-12);
    out.push_back(c);
  }
  return out;
}

double MomentComparison::wave_vs_field() const { return std::abs(p2_wave - p2_field) / p2_wave; }

double MomentComparison::ensemble_z_score() const {
  return p2_ens_se > 0.0 ? std::abs(p2_ens - p2_field) / p2_ens_se
                         : std::numeric_limits<double>::infinity();
}

MomentComparison qm_oracle(const WaveField& state, const SvmParams& params,
                           std::span<const double> p, std::span<const double> pbar) {
  params.require_quantum_point("qm_oracle");
  if (p.size() != pbar.size()) throw InvalidParameters("p and pbar sample counts differ");
  MomentComparison c;
  const auto om = operator_moments(state, params.hbar);
  c.p_mean_wave = om.p_mean;
  c.p2_wave = om.p2;

  const auto slice = extract_drifts(state, params);
  const auto& g = state.grid;
  const Weighted w{trapezoid(slice.rho, g.dx())};
  const std::size_t n = g.n_points;
  std::vector<double> pu(n), pb(n), sq(n), du(n), db(n);
  for (std::size_t i = 0; i < n; ++i) {
    pu[i] = params.mass * slice.u_fwd[i];
    pb[i] = params.mass * slice.u_bwd[i];
    sq[i] = 0.5 * (pu[i] * pu[i] + pb[i] * pb[i]);
  }
  c.p_mean_fwd = w.mean(slice.rho, pu, g.dx());
  c.p_mean_bwd = w.mean(slice.rho, pb, g.dx());
  c.p2_field = w.mean(slice.rho, sq, g.dx());
  for (std::size_t i = 0; i < n; ++i) {
    du[i] = (pu[i] - c.p_mean_fwd) * (pu[i] - c.p_mean_fwd);
    db[i] = (pb[i] - c.p_mean_bwd) * (pb[i] - c.p_mean_bwd);
  }
  c.var_field = 0.5 * (w.mean(slice.rho, du, g.dx()) + w.mean(slice.rho, db, g.dx()));

  if (!p.empty()) {
    c.has_ensemble = true;
    const std::size_t m = p.size();
    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = 0.5 * (p[i] * p[i] + pbar[i] * pbar[i]);
    c.p_mean_ens = 0.5 * (mean_of(p) + mean_of(pbar));
    c.p2_ens = mean_of(s);
    c.p2_ens_se = std::sqrt(var_of(s) / static_cast<double>(m));
  }
  return c;
}

UncertaintyReport kanai_report(std::span<const WaveField> snapshots, const SvmParams& params) {
  UncertaintyReport rep{Source::grid, {}};
  const double bound = 0.5 * params.hbar * params.dim;
  for (const auto& s : snapshots) {
    const auto om = operator_moments(s, params.hbar);
    UncertaintyRow row;
    row.t = s.time;
    row.delta_x = om.delta_x();
    row.delta_p = om.delta_p();
    row.delta_p_phys = std::exp(-params.gamma * s.time) * row.delta_p;
    row.corr = correlation_term(s.grid, extract_drifts(s, params), params);
    row.bound_simple = row.bound_full = bound;
    row.product = row.delta_x * row.delta_p;
    row.product_phys = row.delta_x * row.delta_p_phys;
    rep.rows.push_back(row);
  }
  return rep;
}

DissipativeComparison dissipative_comparison(const DissipativeRun& kostin,
                                             const DissipativeRun& kanai,
                                             const SvmParams& params) {
  if (kostin.gamma != kanai.gamma) {
    throw ConfigMismatch("gamma differs: " + format_double(kostin.gamma) + " vs " +
                         format_double(kanai.gamma));
  }
  if (kostin.potential != kanai.potential) throw ConfigMismatch("potentials differ");
  if (kostin.snapshots.empty() || kanai.snapshots.empty()) {
    throw ConfigMismatch("both runs need at least one snapshot");
  }
  const auto& a = kostin.snapshots.front();
  const auto& b = kanai.snapshots.front();
  if (!(a.grid == b.grid) || a.time != b.time || a.psi != b.psi) {
    throw ConfigMismatch("initial states differ");
  }
  SvmParams p = params;
  p.gamma = kostin.gamma;
  DissipativeComparison out;

  DriftTable table;
  table.grid = a.grid;
  table.nu = p.nu;
  for (const auto& s : kostin.snapshots) table.append(extract_drifts(s, p));
  out.kostin = grid_report(table, p);

  out.kanai = kanai_report(kanai.snapshots, p);
  return out;
}

void write_report_csv(std::ostream& out, const UncertaintyReport& report) {
  CsvWriter csv(out);
  csv.header({"t", "delta_x", "delta_p", "delta_p_phys", "corr", "bound_simple", "bound_full",
              "product", "product_phys", "source"});
  for (const auto& r : report.rows) {
    csv.row(r.t, r.delta_x, r.delta_p, r.delta_p_phys, r.corr, r.bound_simple, r.bound_full,
            r.product, r.product_phys, to_string(report.source));
  }
}

}  // namespace svm
