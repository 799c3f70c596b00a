#include "svm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "svm/audit.hpp"
#include "svm/csv.hpp"
#include "svm/ensemble.hpp"
#include "svm/errors.hpp"
#include "svm/hydro.hpp"

namespace svm {

namespace {

const SvmParams kQm = SvmParams::quantum();
constexpr double kHalfHbar = 0.5;

struct Context {
  const VerifyOptions& opt;
  CriterionResult& result;

  void check(const std::string& name, bool pass, double measured, double bound, double tol) {
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "c%02d_", result.id);
    result.checks.push_back({prefix + name, pass, measured, bound, tol});
  }

  // Writes c<id>_<name> under the output directory, if any.
  void artifact(const std::string& name, const std::string& text) {
    if (!opt.out_dir) return;
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "c%02d_", result.id);
    std::filesystem::create_directories(*opt.out_dir);
    const auto path = *opt.out_dir / (prefix + name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    result.artifacts.push_back(path);
  }

  SimulationOptions sim(double dt, std::size_t steps, std::size_t every, std::uint64_t salt) const {
    SimulationOptions s;
    s.dt = dt;
    s.n_steps = steps;
    s.record_every = every;
    s.seed = opt.seed * 1000 + salt;
    s.threads = opt.threads;
    return s;
  }
};

template <typename F>
std::string to_text(F&& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

double max_product_deviation(const UncertaintyReport& rep) {
  double m = 0.0;
  for (const auto& r : rep.rows) m = std::max(m, std::abs(r.product / kHalfHbar - 1.0));
  return m;
}

double worst_fp_l1(const TrajectoryEnsemble& ens, const DriftTable& table, std::size_t bins) {
  double l1 = 0.0;
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    const auto edges = sample_edges(ens.at(k), bins);
    l1 = std::max(l1, histogram_l1(position_histogram(ens.at(k), edges), edges, table.grid,
                                    table.nearest(ens.times[k]).rho));
  }
  return l1;
}

void c01(Context& c) {
  const auto g = Grid1D::make(-10.0, 10.0, 2001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto wave = evolve_wave(g, v, init_state(g, HarmonicGround{1.0}, kQm), kQm,
                                WaveDynamics::schrodinger, 0.01, 6.28, 157);
  const auto rep = grid_report(wave.table, kQm);
  const double dev = max_product_deviation(rep);
  c.check("kennard_grid", dev <= 1e-6, dev, 0.0, 1e-6);
  const auto ineq = verify_inequality(rep);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : ineq) worst = std::min(worst, x.margin + x.slack);
  c.check("inequality_grid", std::all_of(ineq.begin(), ineq.end(), [](auto& x) { return x.holds; }),
          worst, 0.0, 1e-6);
}

void c02(Context& c) {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const double dt = 0.01;
  const auto wave = evolve_wave(g, v, init_state(g, HarmonicGround{1.0}, kQm), kQm,
                                WaveDynamics::schrodinger, dt, 5.0, 50);
  const auto x0 = sample_initial(g, wave.table.slices[0].rho, c.opt.n_traj, c.opt.seed * 1000 + 21);
  const auto ens = simulate_forward(wave.table, x0, c.sim(dt, 500, 50, 22));
  const auto mom = evaluate_momenta(ens, wave.table, kQm);
  const auto rep = ensemble_report(ens, mom, wave.table, kQm);
  const double dev = max_product_deviation(rep);
  c.check("kennard_ensemble", dev <= 0.02, dev, 0.0, 0.02);
  const double l1 = worst_fp_l1(ens, wave.table, 40);
  c.check("fokker_planck_l1", l1 <= 0.02, l1, 0.02, 0.0);
  c.artifact("report.csv", to_text([&](std::ostream& os) { write_report_csv(os, rep); }));
}

void c03(Context& c) {
  const auto scan = scan_grid(ScanSpec{}, kQm);
  for (const auto& ch : scan.checks) c.check(ch.name, ch.pass, ch.measured, ch.bound, ch.tol);
  c.artifact("scan.csv", to_text([&](std::ostream& os) { write_scan_csv(os, scan.rows); }));
}

void c04(Context& c) {
  const double sigma0 = 1.0;
  const auto g = Grid1D::make(-20.0, 20.0, 2001);
  const double dt = 0.01;
  const auto wave = evolve_wave(g, Potential::free(g), init_state(g, GaussianState{0.0, sigma0, 0.0}, kQm),
                                kQm, WaveDynamics::schrodinger, dt, 2.0, 1);
  const auto expect = [&](double t) {
    return sigma0 * sigma0 + std::pow(kQm.hbar * t / (2.0 * kQm.mass * sigma0), 2);
  };
  double grid_err = 0.0;
  for (std::size_t k = 0; k < wave.table.slices.size(); k += 20) {
    const double t = wave.table.times[k];
    const double dx = delta_x(g, wave.table.slices[k].rho);
    grid_err = std::max(grid_err, std::abs(dx * dx / expect(t) - 1.0));
  }
  c.check("spreading_grid", grid_err <= 1e-4, grid_err, 0.0, 1e-4);

  const auto rep = grid_report(wave.table, kQm);
  std::size_t violations = 0;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    if (!(rep.rows[k].product > rep.rows[k - 1].product)) ++violations;
  }
  const double final_margin = rep.rows.back().product - kHalfHbar;
  c.check("margin_increasing", violations == 0 && final_margin > 0.0, final_margin, 0.0, 0.0);

  const auto x0 = sample_initial(g, wave.table.slices[0].rho, c.opt.n_traj, c.opt.seed * 1000 + 41);
  const auto ens = simulate_forward(wave.table, x0, c.sim(dt, 200, 20, 42));
  double ens_err = 0.0;
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    const double dx = delta_x(ens.at(k));
    ens_err = std::max(ens_err, std::abs(dx * dx / expect(ens.times[k]) - 1.0));
  }
  c.check("spreading_ensemble", ens_err <= 0.02, ens_err, 0.0, 0.02);
}

void c05(Context& c) {
  const auto g = Grid1D::make(-12.0, 12.0, 2401);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  struct Case {
    const char* name;
    InitialState init;
  };
  const Case cases[] = {{"ground", HarmonicGround{1.0}},
                        {"coherent", HarmonicCoherent{1.0, 1.0}},
                        {"boosted", GaussianState{-1.0, 0.9, 1.5}}};
  std::uint64_t salt = 51;
  for (const auto& cs : cases) {
    const double dt = 0.0025;
    const auto wave = evolve_wave(g, v, init_state(g, cs.init, kQm), kQm, WaveDynamics::schrodinger,
                                  dt, 0.5, 1);
    const auto x0 = sample_initial(g, wave.table.slices[0].rho, c.opt.n_traj, c.opt.seed * 1000 + salt++);
    const auto ens = simulate_forward(wave.table, x0, c.sim(dt, 200, 200, salt++));
    const auto mom = evaluate_momenta(ens, wave.table, kQm);
    const std::size_t n = ens.n_traj;
    const std::span<const double> p(mom.p.data() + n, n), pbar(mom.pbar.data() + n, n);
    const auto cmp = qm_oracle(wave.snapshots.back(), kQm, p, pbar);
    const std::string name = cs.name;
    c.check(name + "_wave_vs_field", cmp.wave_vs_field() <= 1e-6, cmp.wave_vs_field(), 0.0, 1e-6);
    c.check(name + "_ensemble_z", cmp.ensemble_z_score() <= 3.0, cmp.ensemble_z_score(), 3.0, 0.0);
  }
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
  const int steps = static_cast<int>(std::ceil(1.0 / (0.45 * hydro_dt_limit(f, tc, kQm))));
  const double dt = 1.0 / steps;
  MadelungError err;
  for (int s = 1; s <= steps; ++s) {
    wf = step_schrodinger(wf, v, kQm, dt);
    f = step_hydro(f, {}, tc, kQm, dt);
    if (s % (steps / 10) == 0 || s == steps) {
      const auto d = extract_drifts(wf, kQm);
      double er = 0.0, eu = 0.0;
      for (std::size_t i = 0; i < n_points; ++i) {
        er += std::abs(f.rho[i] - d.rho[i]);
        eu += d.rho[i] * std::abs(f.u_m[i] - d.u_m[i]);
      }
      err.rho = std::max(err.rho, er * g.dx());
      err.u = std::max(err.u, eu * g.dx());
    }
  }
  return err;
}

void c06(Context& c) {
  const auto coarse = madelung_error(1001);
  const auto fine = madelung_error(2001);
  c.check("rho_l1", coarse.rho <= 1e-3 && fine.rho <= 1e-3, coarse.rho, 1e-3, 0.0);
  c.check("u_l1", coarse.u <= 1e-3 && fine.u <= 1e-3, coarse.u, 1e-3, 0.0);
  const double ratio = coarse.rho / fine.rho;
  c.check("refinement_ratio", ratio >= 3.0 && ratio <= 5.0, ratio, 4.0, 1.0);
}

NewtonResidualReport newton_run(std::size_t n_points, double dt) {
  const auto g = Grid1D::make(-10.0, 10.0, n_points);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  auto wf = init_state(g, HarmonicCoherent{1.0, 1.0}, kQm);
  for (long s = 0; s < std::lround(0.5 / dt); ++s) wf = step_schrodinger(wf, v, kQm, dt);
  std::vector<DriftSlice> slices;
  for (int k = 0; k < 3; ++k) {
    slices.push_back(extract_drifts(wf, kQm));
    wf = step_schrodinger(wf, v, kQm, dt);
  }
  return newton_residual(slices, g, v.values, transport_coefficients(kQm), kQm);
}

void c07(Context& c) {
  const auto coarse = newton_run(1001, 0.01);
  const auto fine = newton_run(2001, 0.005);
  c.check("residual", coarse.weighted_l2 < 1e-3, coarse.weighted_l2, 1e-3, 0.0);
  const double ratio = coarse.weighted_l2 / fine.weighted_l2;
  c.check("second_order", ratio >= 3.0 && ratio <= 5.0, ratio, 4.0, 1.0);

  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  std::mt19937_64 rng(c.opt.seed);
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
    slices.push_back(std::move(s));
  }
  const auto neg = newton_residual(slices, g, Potential::harmonic(g, 1.0, 1.0).values,
                                   transport_coefficients(kQm), kQm);
  const double factor = neg.weighted_l2 / coarse.weighted_l2;
  c.check("negative_control", factor >= 100.0, factor, 100.0, 0.0);
}

void c08(Context& c) {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  DriftTable table;
  table.grid = g;
  table.nu = kQm.nu;
  table.append(extract_drifts(init_state(g, HarmonicGround{1.0}, kQm), kQm));
  const double period = 2.0 * M_PI;
  const std::size_t steps = 628;
  const auto perturb = [period](double x, double t) {
    return std::sin(M_PI * t / period) * x * std::exp(-0.5 * x * x);
  };
  const std::vector<double> eps{-0.04, -0.02, 0.0, 0.02, 0.04};
  const auto x0 = sample_initial(g, table.slices[0].rho, c.opt.n_traj, c.opt.seed * 1000 + 81);
  ActionOptions ao;
  ao.dt = period / steps;
  ao.n_steps = steps;
  ao.seed = c.opt.seed * 1000 + 82;
  ao.threads = c.opt.threads;
  const auto fit = fit_action(
      estimate_action(table, x0, Potential::harmonic(g, 1.0, 1.0).values, kQm, perturb, eps, ao));
  c.check("first_variation", std::abs(fit.slope) <= 3.0 * fit.slope_se, fit.slope, 0.0,
          3.0 * fit.slope_se);
  c.check("second_variation", fit.curvature - 3.0 * fit.curvature_se > 0.0, fit.curvature, 0.0,
          3.0 * fit.curvature_se);
}

SvmParams damped(double gamma) {
  SvmParams p = kQm;
  p.gamma = gamma;
  return p;
}

void c09(Context& c) {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto p = damped(0.2);
  const auto wave = evolve_wave(g, v, init_state(g, HarmonicCoherent{1.0, 1.0}, p), p,
                                WaveDynamics::kostin, 0.01, 25.0, 50);
  const auto rep = grid_report(wave.table, p);
  double phys = std::numeric_limits<double>::infinity(), scaled = phys;
  for (const auto& r : rep.rows) {
    phys = std::min(phys, r.product_phys);
    scaled = std::min(scaled, r.product * std::exp(-p.gamma * r.t));
  }
  c.check("phys_bound", phys >= 0.98 * kHalfHbar, phys, kHalfHbar, 0.02);
  c.check("scaled_bound", scaled >= 0.98 * kHalfHbar, scaled, kHalfHbar, 0.02);
  double rise = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < wave.energy.size(); ++k) {
    rise = std::max(rise, wave.energy[k] - wave.energy[k - 1]);
  }
  c.check("energy_monotone", rise <= 1e-12, rise, 0.0, 1e-12);
  const double e_end = wave.energy.back();
  const double ground = 0.5 * kQm.hbar;
  c.check("energy_limit", std::abs(e_end / ground - 1.0) <= 0.02, e_end, ground, 0.02);
}

void c10(Context& c) {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const auto p = damped(0.2);
  const auto wave = evolve_wave(g, v, init_state(g, HarmonicCoherent{1.0, 1.0}, p), p,
                                WaveDynamics::kanai, 0.01, 15.0, 50);
  const auto rep = kanai_report(wave.snapshots, p);
  double op = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows) op = std::min(op, r.product);
  c.check("operator_bound", op >= kHalfHbar * (1.0 - 1e-6), op, kHalfHbar, 1e-6);
  const double phys_end = rep.rows.back().product_phys;
  c.check("phys_drop", phys_end < 0.9 * kHalfHbar, phys_end, 0.9 * kHalfHbar, 0.0);
}

void c11(Context& c) {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const double dt = 0.01;
  const auto wave = evolve_wave(g, v, init_state(g, HarmonicCoherent{1.0, 1.0}, kQm), kQm,
                                WaveDynamics::schrodinger, dt, 3.0, 1);
  const auto x0 = sample_initial(g, wave.table.slices[0].rho, c.opt.n_traj, c.opt.seed * 1000 + 111);
  const auto ens = simulate_forward(wave.table, x0, c.sim(dt, 300, 100, 112));
  const auto mom = evaluate_momenta(ens, wave.table, kQm);
  double l1 = 0.0;
  std::uint64_t total_mismatch = 0;
  std::string text;
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    const auto h = phase_space_histogram(ens, mom, k);
    std::uint64_t total = 0;
    for (auto n : h.counts) total += n;
    if (total != ens.n_traj) ++total_mismatch;
    l1 = std::max(l1, histogram_l1(h.x_marginal(), h.x_edges, g,
                                    wave.table.nearest(ens.times[k]).rho));
    if (k + 1 == ens.times.size()) {
      text = to_text([&](std::ostream& os) { write_histogram_csv(os, h); });
    }
  }
  // Counts are unsigned, so positivity reduces to every sample landing in a bin.
  c.check("bins_nonnegative", total_mismatch == 0, static_cast<double>(total_mismatch), 0.0, 0.0);
  c.check("marginal_l1", l1 <= 0.02, l1, 0.02, 0.0);
  c.artifact("histogram.csv", text);
}

struct PipelineText {
  std::string drifts, trajectories, report, histogram;
};

PipelineText determinism_pipeline(const VerifyOptions& opt, unsigned threads) {
  const auto g = Grid1D::make(-10.0, 10.0, 1001);
  const auto v = Potential::harmonic(g, 1.0, 1.0);
  const double dt = 0.01;
  const auto wave = evolve_wave(g, v, init_state(g, HarmonicCoherent{1.0, 1.0}, kQm), kQm,
                                WaveDynamics::schrodinger, dt, 1.0, 5);
  const std::size_t n = std::min<std::size_t>(opt.n_traj, 20'000);
  const auto x0 = sample_initial(g, wave.table.slices[0].rho, n, opt.seed * 1000 + 121);
  SimulationOptions s;
  s.dt = dt;
  s.n_steps = 100;
  s.record_every = 25;
  s.seed = opt.seed * 1000 + 122;
  s.threads = threads;
  const auto ens = simulate_forward(wave.table, x0, s);
  const auto mom = evaluate_momenta(ens, wave.table, kQm);
  PipelineText t;
  t.drifts = to_text([&](std::ostream& os) { write_drift_csv(os, wave.table); });
  t.trajectories = to_text([&](std::ostream& os) { write_trajectory_csv(os, ens, mom, 200); });
  t.report = to_text([&](std::ostream& os) {
    write_report_csv(os, ensemble_report(ens, mom, wave.table, kQm));
  });
  t.histogram = to_text([&](std::ostream& os) {
    write_histogram_csv(os, phase_space_histogram(ens, mom, ens.times.size() - 1));
  });
  return t;
}

void c12(Context& c) {
  const unsigned other = std::max(2u, c.opt.threads == 1 ? 4u : c.opt.threads);
  const auto a = determinism_pipeline(c.opt, 1);
  const auto b = determinism_pipeline(c.opt, other);
  const auto same = [&](const char* name, const std::string& x, const std::string& y) {
    c.check(std::string(name) + "_identical", x == y, x == y ? 0.0 : 1.0, 0.0, 0.0);
  };
  same("trajectories", a.trajectories, b.trajectories);
  same("report", a.report, b.report);
  same("histogram", a.histogram, b.histogram);
  const auto& mine = c.opt.threads == 1 ? a : b;
  c.artifact("drifts.csv", mine.drifts);
  c.artifact("trajectories.csv", mine.trajectories);
  c.artifact("report.csv", mine.report);
  c.artifact("histogram.csv", mine.histogram);
}

struct Entry {
  const char* title;
  double budget;
  void (*body)(Context&);
};

const Entry kCriteria[kCriterionCount] = {
    {"Kennard saturation (grid)", 5.0, c01},
    {"Kennard saturation (ensemble)", 60.0, c02},
    {"parameter algebra", 1.0, c03},
    {"free-packet spreading", 30.0, c04},
    {"momentum moment oracle", 60.0, c05},
    {"Madelung equivalence", 60.0, c06},
    {"stochastic-Newton residual", 10.0, c07},
    {"action stationarity", 120.0, c08},
    {"Kostin asymptotics", 120.0, c09},
    {"Kanai contrast", 60.0, c10},
    {"phase-space positivity", 60.0, c11},
    {"determinism across thread counts", 120.0, c12},
};

const Entry& entry(int id) {
  if (id < 1 || id > kCriterionCount) {
    throw ConfigError("criterion id " + std::to_string(id) + " is outside 1.." +
                      std::to_string(kCriterionCount));
  }
  return kCriteria[id - 1];
}

}  // namespace

bool CriterionResult::pass() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

const char* criterion_title(int id) { return entry(id).title; }

double criterion_budget(int id) { return entry(id).budget; }

CriterionResult run_criterion(int id, const VerifyOptions& options) {
  const auto& e = entry(id);
  CriterionResult result;
  result.id = id;
  result.title = e.title;
  result.budget = e.budget;
  Context ctx{options, result};
  const auto start = std::chrono::steady_clock::now();
  e.body(ctx);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.check("runtime", result.seconds < result.budget, result.seconds, result.budget, 0.0);
  return result;
}

}  // namespace svm
