#include "svm/ensemble.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "svm/csv.hpp"
#include "svm/errors.hpp"

namespace svm {

namespace {

// Runs body(begin, end) over contiguous index chunks.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

struct Lerp {
  double x_min;
  double inv_dx;
  std::size_t last;

  explicit Lerp(const Grid1D& g)
      : x_min(g.x_min), inv_dx(1.0 / g.dx()), last(g.n_points - 1) {}

  double operator()(const std::vector<double>& v, double x) const {
    double s = (x - x_min) * inv_dx;
    if (!(s > 0.0)) return v.front();
    if (s >= static_cast<double>(last)) return v.back();
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return v[i] + w * (v[i + 1] - v[i]);
  }
};

struct Reflector {
  double lo;
  double hi;

  explicit Reflector(const Grid1D& g) : lo(g.x_min + g.dx()), hi(g.x_max - g.dx()) {}

  double operator()(double r) const {
    if (r < lo) r = 2.0 * lo - r;
    if (r > hi) r = 2.0 * hi - r;
    return std::clamp(r, lo, hi);
  }
};

void check_options(const DriftTable& table, std::size_t n_init, std::size_t record_every,
                   double dt) {
  if (table.slices.empty()) throw InvalidParameters("drift table is empty");
  if (n_init == 0) throw InvalidParameters("ensemble needs at least one trajectory");
  if (record_every == 0) throw InvalidParameters("record_every must be >= 1");
  if (!(dt > 0.0)) throw InvalidParameters("dt must be > 0");
}

TrajectoryEnsemble simulate(const DriftTable& table, std::span<const double> start,
                            const SimulationOptions& opt, Direction dir) {
  check_options(table, start.size(), opt.record_every, opt.dt);
  const std::size_t n = start.size();
  const std::size_t n_rec = 1 + opt.n_steps / opt.record_every;
  const double sign = dir == Direction::forward ? 1.0 : -1.0;

  TrajectoryEnsemble ens;
  ens.n_traj = n;
  ens.direction = dir;
  ens.positions.assign(n * n_rec, 0.0);
  ens.times.resize(n_rec);
  const auto slot = [&](std::size_t j) { return dir == Direction::forward ? j : n_rec - 1 - j; };
  for (std::size_t j = 0; j < n_rec; ++j) {
    ens.times[slot(j)] =
        opt.t_start + sign * static_cast<double>(j * opt.record_every) * opt.dt;
  }

  std::vector<const std::vector<double>*> drift(opt.n_steps);
  for (std::size_t s = 0; s < opt.n_steps; ++s) {
    const auto& slice = table.nearest(opt.t_start + sign * static_cast<double>(s) * opt.dt);
    drift[s] = dir == Direction::forward ? &slice.u_fwd : &slice.u_bwd;
  }
  const Lerp lerp(table.grid);
  const Reflector reflect(table.grid);
  const double amp = std::sqrt(2.0 * table.nu * opt.dt);
  const Stream stream = dir == Direction::forward ? Stream::forward : Stream::backward;

  parallel_chunks(n, opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NoiseStream noise(opt.seed, i, stream);
      double r = start[i];
      ens.positions[slot(0) * n + i] = r;
      std::array<double, 2> z{};
      for (std::size_t s = 0; s < opt.n_steps; ++s) {
        if (s % 2 == 0) z = noise.normals(s / 2);
        r = reflect(r + sign * lerp(*drift[s], r) * opt.dt + amp * z[s % 2]);
        if ((s + 1) % opt.record_every == 0) {
          ens.positions[slot((s + 1) / opt.record_every) * n + i] = r;
        }
      }
    }
  });
  return ens;
}

struct Moments {
  double mean;
  double sd;
};

Moments moments(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::sqrt(var)};
}

std::size_t bin_of(double v, double lo, double inv_w, std::size_t nb) {
  const double s = (v - lo) * inv_w;
  if (!(s > 0.0)) return 0;
  const auto b = static_cast<std::size_t>(s);
  return std::min(b, nb - 1);
}

}  // namespace

std::vector<double> sample_initial(const Grid1D& grid, std::span<const double> rho,
                                   std::size_t n_traj, std::uint64_t seed) {
  if (rho.size() != grid.n_points) throw InvalidParameters("rho length differs from grid");
  const double dx = grid.dx();
  std::vector<double> cdf(grid.n_points, 0.0);
  for (std::size_t j = 1; j < grid.n_points; ++j) {
    cdf[j] = cdf[j - 1] + 0.5 * dx * (rho[j - 1] + rho[j]);
  }
  const double total = cdf.back();
  if (!(total > 0.0)) throw InvalidParameters("density has no mass");
  std::vector<double> out(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) {
    const double target = NoiseStream(seed, i, Stream::initial).uniforms(0)[0] * total;
    auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), target);
    if (it == cdf.end()) it = cdf.end() - 1;
    const auto j = static_cast<std::size_t>(it - cdf.begin()) - 1;
    // Invert the quadratic CDF of the linear density on [x_j, x_j+1].
    const double a = rho[j], b = rho[j + 1];
    const double need = target - cdf[j];
    const double slope = (b - a) / dx;
    double s;
    if (std::abs(slope) * dx < 1e-12 * std::max(a, b)) {
      s = a > 0.0 ? need / a : 0.5 * dx;
    } else {
      s = (-a + std::sqrt(std::max(0.0, a * a + 2.0 * slope * need))) / slope;
    }
    out[i] = grid.x(j) + std::clamp(s, 0.0, dx);
  }
  return out;
}

TrajectoryEnsemble simulate_forward(const DriftTable& table, std::span<const double> initial,
                                    const SimulationOptions& options) {
  return simulate(table, initial, options, Direction::forward);
}

TrajectoryEnsemble simulate_backward(const DriftTable& table, std::span<const double> final,
                                     const SimulationOptions& options) {
  return simulate(table, final, options, Direction::backward);
}

std::vector<MeanDerivative> mean_derivative(const TrajectoryEnsemble& ens,
                                            const DriftTable& table, Direction side,
                                            std::size_t n_bins, std::size_t min_count) {
  if (ens.times.size() < 2) throw InvalidParameters("need at least two recorded times");
  if (n_bins == 0) throw InvalidParameters("n_bins must be >= 1");
  const Lerp lerp(table.grid);
  std::vector<MeanDerivative> out;
  const std::size_t first = side == Direction::forward ? 0 : 1;
  const std::size_t last = side == Direction::forward ? ens.times.size() - 1 : ens.times.size();
  for (std::size_t k = first; k < last; ++k) {
    const auto here = ens.at(k);
    const auto other = side == Direction::forward ? ens.at(k + 1) : ens.at(k - 1);
    const double step = side == Direction::forward ? ens.times[k + 1] - ens.times[k]
                                                   : ens.times[k] - ens.times[k - 1];
    const auto m = moments(here);
    const double half = 4.0 * std::max(m.sd, 1e-300);
    const double lo = m.mean - half, w = 2.0 * half / static_cast<double>(n_bins);
    MeanDerivative md;
    md.time = ens.times[k];
    md.counts.assign(n_bins, 0);
    std::vector<double> sum(n_bins, 0.0);
    for (std::size_t i = 0; i < ens.n_traj; ++i) {
      if (here[i] < lo || here[i] >= lo + 2.0 * half) continue;
      const std::size_t b = bin_of(here[i], lo, 1.0 / w, n_bins);
      const double inc = side == Direction::forward ? other[i] - here[i] : here[i] - other[i];
      sum[b] += inc / step;
      ++md.counts[b];
    }
    const auto& slice = table.nearest(md.time);
    const auto& field = side == Direction::forward ? slice.u_fwd : slice.u_bwd;
    bool any = false;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double c = lo + (static_cast<double>(b) + 0.5) * w;
      md.bin_centers.push_back(c);
      md.field.push_back(lerp(field, c));
      const bool use = md.counts[b] >= min_count;
      md.used.push_back(use ? 1 : 0);
      md.estimate.push_back(use ? sum[b] / static_cast<double>(md.counts[b])
                                : std::numeric_limits<double>::quiet_NaN());
      any = any || use;
    }
    if (!any) {
      throw EmptyBin("no bin holds " + std::to_string(min_count) + " samples at t = " +
                     std::to_string(md.time));
    }
    out.push_back(std::move(md));
  }
  return out;
}

SlopeFit pooled_slope(std::span<const MeanDerivative> derivatives, double mass_fraction) {
  double sw = 0, sx = 0, sxx = 0, sy = 0, sxy = 0, sf = 0, sxf = 0;
  const double lo = 0.5 * (1.0 - mass_fraction), hi = 0.5 * (1.0 + mass_fraction);
  for (const auto& md : derivatives) {
    const double total = static_cast<double>(
        std::accumulate(md.counts.begin(), md.counts.end(), std::size_t{0}));
    double below = 0.0;
    for (std::size_t b = 0; b < md.counts.size(); ++b) {
      const double c = static_cast<double>(md.counts[b]);
      const double mid = (below + 0.5 * c) / total;
      below += c;
      if (!md.used[b] || mid < lo || mid > hi) continue;
      const double x = md.bin_centers[b];
      sw += c;
      sx += c * x;
      sxx += c * x * x;
      sy += c * md.estimate[b];
      sxy += c * x * md.estimate[b];
      sf += c * md.field[b];
      sxf += c * x * md.field[b];
    }
  }
  const double den = sw * sxx - sx * sx;
  if (!(den > 0.0)) throw EmptyBin("too few populated bins for a slope fit");
  return {(sw * sxy - sx * sy) / den, (sw * sxf - sx * sf) / den};
}

Momenta evaluate_momenta(const TrajectoryEnsemble& ens, const DriftTable& table,
                         const SvmParams& params) {
  if (is_singular(params)) {
    throw SingularKineticMatrix("det M = " + format_double(det_m(params)) +
                                "; momenta are undefined");
  }
  const auto km = build_matrix(params);
  const Lerp lerp(table.grid);
  Momenta out;
  out.times = ens.times;
  out.p.resize(ens.positions.size());
  out.pbar.resize(ens.positions.size());
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    const double t = ens.times[k];
    const auto& slice = table.nearest(t);
    const double scale = 2.0 * params.mass * (params.gamma > 0.0 ? std::exp(params.gamma * t) : 1.0);
    const auto r = ens.at(k);
    for (std::size_t i = 0; i < ens.n_traj; ++i) {
      const double u = lerp(slice.u_fwd, r[i]);
      const double ub = lerp(slice.u_bwd, r[i]);
      out.p[k * ens.n_traj + i] = scale * (km.entries[0][0] * u + km.entries[0][1] * ub);
      out.pbar[k * ens.n_traj + i] = scale * (km.entries[1][0] * u + km.entries[1][1] * ub);
    }
  }
  return out;
}

std::vector<double> sample_edges(std::span<const double> samples, std::size_t n_bins,
                                 double half_width) {
  if (n_bins == 0 || samples.empty()) throw InvalidParameters("empty histogram request");
  const auto m = moments(samples);
  double half = half_width * m.sd;
  if (!(half > 1e-12 * (1.0 + std::abs(m.mean)))) half = 0.5 * (1.0 + std::abs(m.mean)) * 1e-6;
  std::vector<double> edges(n_bins + 1);
  for (std::size_t b = 0; b <= n_bins; ++b) {
    edges[b] = m.mean - half + 2.0 * half * static_cast<double>(b) / static_cast<double>(n_bins);
  }
  return edges;
}

std::vector<std::uint64_t> position_histogram(std::span<const double> samples,
                                              std::span<const double> edges) {
  const std::size_t nb = edges.size() - 1;
  const double inv_w = static_cast<double>(nb) / (edges.back() - edges.front());
  std::vector<std::uint64_t> counts(nb, 0);
  for (double v : samples) ++counts[bin_of(v, edges.front(), inv_w, nb)];
  return counts;
}

std::vector<std::uint64_t> PhaseSpaceHistogram::x_marginal() const {
  std::vector<std::uint64_t> m(nx(), 0);
  const std::size_t inner = np() * nq();
  for (std::size_t ix = 0; ix < nx(); ++ix) {
    for (std::size_t j = 0; j < inner; ++j) m[ix] += counts[ix * inner + j];
  }
  return m;
}

PhaseSpaceHistogram phase_space_histogram(const TrajectoryEnsemble& ens, const Momenta& mom,
                                          std::size_t k, const HistogramBins& bins) {
  if (mom.p.size() != ens.positions.size() || mom.pbar.size() != ens.positions.size()) {
    throw InvalidParameters("momenta and ensemble sizes differ");
  }
  if (k >= ens.times.size()) throw InvalidParameters("time index out of range");
  const std::size_t n = ens.n_traj;
  const auto x = ens.at(k);
  const std::span<const double> p(mom.p.data() + k * n, n), q(mom.pbar.data() + k * n, n);
  PhaseSpaceHistogram h;
  h.x_edges = sample_edges(x, bins.nx);
  h.p_edges = sample_edges(p, bins.np);
  h.pbar_edges = sample_edges(q, bins.nq);
  h.n_samples = n;
  h.counts.assign(bins.nx * bins.np * bins.nq, 0);
  const auto inv = [](const std::vector<double>& e) {
    return static_cast<double>(e.size() - 1) / (e.back() - e.front());
  };
  const double ix_w = inv(h.x_edges), ip_w = inv(h.p_edges), iq_w = inv(h.pbar_edges);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = bin_of(x[i], h.x_edges.front(), ix_w, bins.nx);
    const std::size_t b = bin_of(p[i], h.p_edges.front(), ip_w, bins.np);
    const std::size_t c = bin_of(q[i], h.pbar_edges.front(), iq_w, bins.nq);
    ++h.counts[(a * bins.np + b) * bins.nq + c];
  }
  return h;
}

double histogram_l1(std::span<const std::uint64_t> counts, std::span<const double> edges,
                    const Grid1D& grid, std::span<const double> rho) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  const double mass = trapezoid(rho, grid.dx());
  constexpr int kSub = 32;
  double l1 = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double w = edges[b + 1] - edges[b];
    double avg = 0.0;
    for (int s = 0; s < kSub; ++s) {
      avg += interpolate(grid, rho, edges[b] + (s + 0.5) * w / kSub);
    }
    avg /= kSub * mass;
    l1 += std::abs(static_cast<double>(counts[b]) / (n * w) - avg) * w;
  }
  return l1;
}

ActionEstimate estimate_action(const DriftTable& table, std::span<const double> initial,
                               std::span<const double> potential, const SvmParams& params,
                               const PhasePerturbation& perturbation, std::span<const double> eps,
                               const ActionOptions& opt) {
  check_options(table, initial.size(), 1, opt.dt);
  if (eps.empty()) throw InvalidParameters("no eps values given");
  if (opt.batches == 0 || opt.batches > initial.size()) {
    throw InvalidParameters("batch count must lie in [1, n_traj]");
  }
  if (potential.size() != table.grid.n_points) {
    throw InvalidParameters("potential table length differs from grid");
  }
  const auto& g = table.grid;
  const double t_end = opt.t_start + static_cast<double>(opt.n_steps) * opt.dt;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    if (std::abs(perturbation(g.x(j), opt.t_start)) > 1e-12 ||
        std::abs(perturbation(g.x(j), t_end)) > 1e-12) {
      throw InvalidParameters("phase perturbation must vanish at both end times");
    }
  }

  // Perturbation velocity 2 nu d_x delta_theta on the grid at every step.
  const double dx = g.dx();
  const std::size_t ns = opt.n_steps + 1;
  std::vector<std::vector<double>> w(ns, std::vector<double>(g.n_points, 0.0));
  std::vector<const DriftSlice*> slice(ns);
  std::vector<double> times(ns), weight(ns, opt.dt), lscale(ns, 1.0);
  for (std::size_t s = 0; s < ns; ++s) {
    times[s] = opt.t_start + static_cast<double>(s) * opt.dt;
    slice[s] = &table.nearest(times[s]);
    if (params.gamma > 0.0) lscale[s] = std::exp(params.gamma * times[s]);
    std::vector<double> th(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) th[j] = perturbation(g.x(j), times[s]);
    for (std::size_t j = 1; j + 1 < g.n_points; ++j) {
      w[s][j] = 2.0 * params.nu * (th[j + 1] - th[j - 1]) / (2.0 * dx);
    }
  }
  weight.front() = weight.back() = 0.5 * opt.dt;

  const double c_uu = (0.5 + params.alpha2) * (0.5 + params.alpha1);
  const double c_bb = (0.5 + params.alpha2) * (0.5 - params.alpha1);
  const double c_ub = 0.5 - params.alpha2;
  const double half_m = 0.5 * params.mass;
  const std::vector<double> v(potential.begin(), potential.end());
  const Lerp lerp(g);
  const Reflector reflect(g);
  const double amp = std::sqrt(2.0 * table.nu * opt.dt);
  const std::size_t n = initial.size(), ne = eps.size();
  std::vector<double> per_traj(n * ne, 0.0);

  parallel_chunks(n, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> r(ne);
    for (std::size_t i = begin; i < end; ++i) {
      const NoiseStream noise(opt.seed, i, Stream::forward);
      std::fill(r.begin(), r.end(), initial[i]);
      double* acc = &per_traj[i * ne];
      std::array<double, 2> z{};
      for (std::size_t s = 0; s < ns; ++s) {
        const auto& sl = *slice[s];
        if (s % 2 == 0 && s + 1 < ns) z = noise.normals(s / 2);
        for (std::size_t e = 0; e < ne; ++e) {
          const double dw = eps[e] * lerp(w[s], r[e]);
          const double u = lerp(sl.u_fwd, r[e]) + dw;
          const double ub = lerp(sl.u_bwd, r[e]) + dw;
          const double lag =
              half_m * (c_uu * u * u + c_bb * ub * ub + c_ub * u * ub) - lerp(v, r[e]);
          acc[e] += weight[s] * lscale[s] * lag;
          if (s + 1 < ns) r[e] = reflect(r[e] + u * opt.dt + amp * z[s % 2]);
        }
      }
    }
  });

  ActionEstimate est;
  est.eps.assign(eps.begin(), eps.end());
  est.action.assign(ne, 0.0);
  est.batch_action.assign(opt.batches, std::vector<double>(ne, 0.0));
  for (std::size_t b = 0; b < opt.batches; ++b) {
    const std::size_t begin = n * b / opt.batches, end = n * (b + 1) / opt.batches;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t e = 0; e < ne; ++e) {
        est.batch_action[b][e] += per_traj[i * ne + e];
        est.action[e] += per_traj[i * ne + e];
      }
    }
    for (auto& x : est.batch_action[b]) x /= static_cast<double>(end - begin);
  }
  for (auto& x : est.action) x /= static_cast<double>(n);
  return est;
}

ActionFit fit_action(const ActionEstimate& est) {
  if (est.eps.size() < 3) throw InvalidParameters("quadratic fit needs >= 3 eps values");
  // Normal equations for I = a + b eps + c eps^2.
  double s[5] = {0, 0, 0, 0, 0};
  for (double e : est.eps) {
    double p = 1.0;
    for (double& x : s) {
      x += p;
      p *= e;
    }
  }
  const std::array<std::array<double, 3>, 3> a{{{s[0], s[1], s[2]}, {s[1], s[2], s[3]},
                                                 {s[2], s[3], s[4]}}};
  const auto det3 = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(a);
  if (!(std::abs(d) > 0.0)) throw InvalidParameters("eps values do not support a quadratic fit");
  const auto solve = [&](const std::vector<double>& y) {
    std::array<double, 3> rhs{0, 0, 0};
    for (std::size_t i = 0; i < y.size(); ++i) {
      rhs[0] += y[i];
      rhs[1] += y[i] * est.eps[i];
      rhs[2] += y[i] * est.eps[i] * est.eps[i];
    }
    std::array<double, 3> coef{};
    for (int c = 0; c < 3; ++c) {
      auto m = a;
      for (int r = 0; r < 3; ++r) m[r][c] = rhs[r];
      coef[c] = det3(m) / d;
    }
    return coef;
  };
  const std::size_t nb = est.batch_action.size();
  std::vector<std::array<double, 3>> coefs;
  for (const auto& y : est.batch_action) coefs.push_back(solve(y));
  const auto stat = [&](int c, double scale) {
    double mean = 0.0;
    for (const auto& k : coefs) mean += k[c];
    mean /= static_cast<double>(nb);
    double var = 0.0;
    for (const auto& k : coefs) var += (k[c] - mean) * (k[c] - mean);
    const double se = nb > 1 ? std::sqrt(var / static_cast<double>(nb - 1) / static_cast<double>(nb)) : 0.0;
    return std::pair{scale * mean, scale * se};
  };
  ActionFit fit;
  std::tie(fit.value, fit.value_se) = stat(0, 1.0);
  std::tie(fit.slope, fit.slope_se) = stat(1, 1.0);
  std::tie(fit.curvature, fit.curvature_se) = stat(2, 2.0);
  return fit;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryEnsemble& ens, const Momenta& mom,
                          std::size_t max_traj) {
  CsvWriter csv(out);
  csv.header({"traj", "t", "x", "p", "pbar"});
  const std::size_t n = std::min(max_traj, ens.n_traj);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
      const std::size_t idx = k * ens.n_traj + i;
      csv.row(i, ens.times[k], ens.positions[idx], mom.p[idx], mom.pbar[idx]);
    }
  }
}

void write_histogram_csv(std::ostream& out, const PhaseSpaceHistogram& h) {
  CsvWriter csv(out);
  csv.header({"x_bin", "P_bin", "Pbar_bin", "count"});
  for (std::size_t a = 0; a < h.nx(); ++a) {
    for (std::size_t b = 0; b < h.np(); ++b) {
      for (std::size_t c = 0; c < h.nq(); ++c) {
        const auto count = h.counts[(a * h.np() + b) * h.nq() + c];
        if (count > 0) csv.row(a, b, c, count);
      }
    }
  }
}

}  // namespace svm
