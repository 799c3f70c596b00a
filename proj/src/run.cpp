#include "svm/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "svm/audit.hpp"
#include "svm/csv.hpp"
#include "svm/ensemble.hpp"
#include "svm/errors.hpp"
#include "svm/hydro.hpp"
#include "svm/verify.hpp"

namespace svm {

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string format_check(const CheckLine& c) {
  return "CHECK " + c.name + (c.pass ? " PASS" : " FAIL") + " measured=" + shortest(c.measured) +
         " bound=" + shortest(c.bound) + " tol=" + shortest(c.tol);
}

bool RunResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

namespace {

std::size_t whole_steps(double t_final, double dt) {
  const double n = t_final / dt;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw ConfigError("time.t_final = " + format_double(t_final) +
                      " is not a whole number of steps of " + format_double(dt));
  }
  return static_cast<std::size_t>(rounded);
}

class Artifacts {
 public:
  explicit Artifacts(const std::filesystem::path& dir) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw ConfigError("cannot create output directory " + dir_.string());
    }
  }

  std::ofstream open(const std::string& name, RunResult& result) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    result.artifacts.push_back(path);
    return out;
  }

 private:
  std::filesystem::path dir_;
};

void write_summary(const RunConfig& config, RunResult& result, Artifacts& art) {
  auto out = art.open("summary.txt", result);
  out << "scenario " << to_string(config.scenario) << '\n';
  for (const auto& c : result.checks) out << format_check(c) << '\n';
}

double max_rel_deviation(const UncertaintyReport& rep, double target) {
  double m = 0.0;
  for (const auto& r : rep.rows) m = std::max(m, std::abs(r.product / target - 1.0));
  return m;
}

void ensemble_stage(const RunConfig& c, const WaveRun& wave, const SvmParams& params,
                    std::size_t steps, UncertaintyReport& ens_report, RunResult& result,
                    Artifacts& art) {
  const auto& g = wave.table.grid;
  const auto x0 = sample_initial(g, wave.table.slices.front().rho, c.n_traj, c.seed);
  SimulationOptions opt;
  opt.dt = c.dt;
  opt.n_steps = steps;
  opt.record_every = c.output_every;
  opt.t_start = wave.table.times.front();
  opt.seed = c.seed;
  opt.threads = c.threads;
  const auto ens = simulate_forward(wave.table, x0, opt);
  const auto mom = evaluate_momenta(ens, wave.table, params);
  ens_report = ensemble_report(ens, mom, wave.table, params);

  double l1 = 0.0;
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    const auto edges = sample_edges(ens.at(k), c.histogram_bins);
    l1 = std::max(l1, histogram_l1(position_histogram(ens.at(k), edges), edges, g,
                                    wave.table.nearest(ens.times[k]).rho));
  }
  result.checks.push_back({"fokker_planck_l1", l1 <= 0.02, l1, 0.02, 0.0});
  const auto checks = verify_inequality(ens_report);
  const bool holds = std::all_of(checks.begin(), checks.end(), [](auto& x) { return x.holds; });
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : checks) worst = std::min(worst, x.margin + x.slack);
  result.checks.push_back({"inequality_ensemble", holds, worst, 0.0, 0.0});

  if (c.trajectory_csv_max > 0) {
    auto out = art.open("trajectories.csv", result);
    write_trajectory_csv(out, ens, mom, c.trajectory_csv_max);
  }
  auto hist = art.open("histogram.csv", result);
  write_histogram_csv(hist, phase_space_histogram(ens, mom, ens.times.size() - 1,
                                                  {c.histogram_bins, 24, 24}));
}

RunResult run_wave(const RunConfig& c) {
  RunResult result;
  Artifacts art(c.out_dir);
  const auto grid = Grid1D::make(c.grid.x_min, c.grid.x_max, c.grid.n_points);
  const auto potential = make_potential(grid, c.potential, c.params.mass);
  const auto init = init_state(grid, c.initial, c.params);
  const WaveDynamics dyn = c.scenario == Scenario::kostin  ? WaveDynamics::kostin
                           : c.scenario == Scenario::kanai ? WaveDynamics::kanai
                                                           : WaveDynamics::schrodinger;
  const std::size_t steps = whole_steps(c.t_final, c.dt);
  const auto wave = evolve_wave(grid, potential, init, c.params, dyn, c.dt, c.t_final, c.output_every);
  {
    auto out = art.open("drifts.csv", result);
    write_drift_csv(out, wave.table);
  }
  const double kennard = 0.5 * c.params.hbar * c.params.dim;
  const auto rep = dyn == WaveDynamics::kanai ? kanai_report(wave.snapshots, c.params)
                                              : grid_report(wave.table, c.params);

  double norm_dev = 0.0;
  for (double n : wave.norm) norm_dev = std::max(norm_dev, std::abs(n - 1.0));
  result.checks.push_back({"norm_conservation", norm_dev <= 1e-10, norm_dev, 0.0, 1e-10});

  if (dyn == WaveDynamics::schrodinger) {
    const auto checks = verify_inequality(rep);
    const bool holds = std::all_of(checks.begin(), checks.end(), [](auto& x) { return x.holds; });
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : checks) worst = std::min(worst, x.margin + x.slack);
    result.checks.push_back({"inequality_grid", holds, worst, 0.0, 1e-6});
    if (std::holds_alternative<HarmonicGround>(c.initial) &&
        c.potential.kind == Potential::Kind::harmonic) {
      const double dev = max_rel_deviation(rep, kennard);
      result.checks.push_back({"kennard_saturation_grid", dev <= 1e-6, dev, 0.0, 1e-6});
    }
  } else if (dyn == WaveDynamics::kostin) {
    double phys = std::numeric_limits<double>::infinity();
    double scaled = phys;
    for (const auto& r : rep.rows) {
      phys = std::min(phys, r.product_phys);
      scaled = std::min(scaled, r.product * std::exp(-c.params.gamma * r.t));
    }
    result.checks.push_back({"kostin_phys_bound", phys >= 0.98 * kennard, phys, kennard, 0.02});
    result.checks.push_back(
        {"kostin_scaled_bound", scaled >= 0.98 * kennard, scaled, kennard, 0.02});
    double rise = 0.0;
    for (std::size_t k = 1; k < wave.energy.size(); ++k) {
      rise = std::max(rise, wave.energy[k] - wave.energy[k - 1]);
    }
    result.checks.push_back({"energy_monotone", rise <= 1e-12, rise, 0.0, 1e-12});
  } else {
    double op = std::numeric_limits<double>::infinity();
    double phys_at_3 = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) {
      op = std::min(op, r.product);
      if (c.params.gamma * r.t <= 3.0 + 1e-9) phys_at_3 = std::min(phys_at_3, r.product_phys);
    }
    result.checks.push_back(
        {"kanai_operator_bound", op >= kennard * (1.0 - 1e-6), op, kennard, 1e-6});
    if (c.params.gamma * c.t_final >= 3.0) {
      result.checks.push_back(
          {"kanai_phys_drop", phys_at_3 < 0.9 * kennard, phys_at_3, 0.9 * kennard, 0.0});
    }
  }

  UncertaintyReport ens_report{Source::ensemble, {}};
  if (c.n_traj > 0) ensemble_stage(c, wave, c.params, steps, ens_report, result, art);
  {
    auto out = art.open("report.csv", result);
    write_report_csv(out, rep);
    if (!ens_report.rows.empty()) {
      // Same columns; skip the second header line.
      std::ostringstream tmp;
      write_report_csv(tmp, ens_report);
      const auto text = tmp.str();
      out << text.substr(text.find('\n') + 1);
    }
  }
  write_summary(c, result, art);
  return result;
}

RunResult run_hydro(const RunConfig& c) {
  RunResult result;
  Artifacts art(c.out_dir);
  const auto grid = Grid1D::make(c.grid.x_min, c.grid.x_max, c.grid.n_points);
  const auto potential = make_potential(grid, c.potential, c.params.mass);
  const auto tc = transport_coefficients(c.params);
  const bool qm = c.params.is_quantum_point();
  SvmParams wave_params = SvmParams::quantum(c.params.mass, c.params.hbar, c.params.dim);
  auto wf = init_state(grid, c.initial, wave_params);
  auto f = fluid_from_drifts(grid, extract_drifts(wf, wave_params));
  HydroForcing forcing;
  forcing.form = c.hydro.form;
  forcing.eos = c.hydro.eos;
  if (c.potential.kind != Potential::Kind::free) forcing.potential = potential.values;

  double dt = c.dt > 0.0 ? c.dt : c.hydro.dt_safety * hydro_dt_limit(f, tc, c.params);
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.t_final / dt - 1e-9)));
  dt = c.t_final / static_cast<double>(steps);
  const bool compare = c.hydro.compare_schrodinger && qm && tc.mu == 0.0;
  const double m0 = f.total_mass();

  const auto slice_of = [](const FluidState& s) {
    DriftSlice d;
    d.time = s.time;
    d.rho = s.rho;
    d.u_m = s.u_m;
    return d;
  };
  std::vector<FluidState> recorded{f};
  std::vector<NewtonResidual> residuals;
  std::vector<DriftSlice> window{slice_of(f)};
  double madelung = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    f = step_hydro(f, forcing, tc, c.params, dt);
    if (compare) wf = step_schrodinger(wf, potential, wave_params, dt);
    window.push_back(slice_of(f));
    if (window.size() > 3) window.erase(window.begin());
    const bool record = s % c.output_every == 0 || s == steps;
    if (record) {
      recorded.push_back(f);
      if (compare) {
        const auto d = extract_drifts(wf, wave_params);
        double l1 = 0.0;
        for (std::size_t i = 0; i < grid.n_points; ++i) l1 += std::abs(f.rho[i] - d.rho[i]);
        madelung = std::max(madelung, l1 * grid.dx());
      }
    }
    // Residual for the slice preceding the current one once it is centered.
    if (window.size() == 3 && (s - 1) % c.output_every == 0 && s - 1 > 0) {
      auto r = newton_residual(window, grid, forcing.potential.empty()
                                                 ? std::vector<double>(grid.n_points, 0.0)
                                                 : forcing.potential,
                               tc, c.params, c.hydro.form, c.hydro.eos);
      residuals.push_back(std::move(r.slices.front()));
    }
  }
  {
    auto out = art.open("hydro.csv", result);
    write_hydro_csv(out, recorded, residuals);
  }
  const double drift = std::abs(f.total_mass() - m0);
  const double mass_tol = 1e-8 * c.t_final + 1e-13;
  result.checks.push_back({"mass_conservation", drift <= mass_tol, drift, 0.0, mass_tol});
  double res = 0.0;
  for (const auto& r : residuals) res = std::max(res, r.weighted_l2);
  if (!residuals.empty()) {
    result.checks.push_back({"newton_residual", res < 1e-3, res, 1e-3, 0.0});
  }
  if (compare) result.checks.push_back({"madelung_l1", madelung <= 1e-3, madelung, 1e-3, 0.0});
  write_summary(c, result, art);
  return result;
}

}  // namespace

RunResult verify_suite(const RunConfig& c) {
  RunResult result;
  Artifacts art(c.out_dir);
  VerifyOptions opt;
  opt.seed = c.seed;
  opt.threads = c.threads;
  opt.n_traj = c.verify_n_traj;
  opt.out_dir = c.out_dir;
  for (int id : c.criteria) {
    const auto cr = run_criterion(id, opt);
    for (const auto& ch : cr.checks) result.checks.push_back(ch);
    result.artifacts.insert(result.artifacts.end(), cr.artifacts.begin(), cr.artifacts.end());
  }
  write_summary(c, result, art);
  return result;
}

Potential make_potential(const Grid1D& grid, const PotentialSpec& spec, double mass) {
  return spec.kind == Potential::Kind::free ? Potential::free(grid)
                                            : Potential::harmonic(grid, spec.omega, mass);
}

WaveRun evolve_wave(const Grid1D& grid, const Potential& potential, const WaveField& initial,
                    const SvmParams& params, WaveDynamics dynamics, double dt, double t_final,
                    std::size_t output_every) {
  const std::size_t steps = whole_steps(t_final, dt);
  WaveRun run;
  run.table.grid = grid;
  run.table.nu = params.nu;
  auto wf = initial;
  const auto record = [&] {
    run.table.append(extract_drifts(wf, params));
    run.energy.push_back(energy(wf, potential, params));
    run.norm.push_back(wf.norm());
    run.snapshots.push_back(wf);
  };
  record();
  for (std::size_t s = 1; s <= steps; ++s) {
    switch (dynamics) {
      case WaveDynamics::schrodinger:
        wf = step_schrodinger(wf, potential, params, dt);
        break;
      case WaveDynamics::kostin:
        wf = step_kostin(wf, potential, params, dt);
        break;
      case WaveDynamics::kanai:
        wf = step_kanai(wf, potential, params, dt);
        break;
    }
    if (s % output_every == 0 || s == steps) record();
  }
  return run;
}

ScanResult scan_grid(const ScanSpec& s, const SvmParams& base) {
  const auto axis = [](double lo, double hi, std::size_t n, std::size_t i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  ScanResult out;
  double det_err = 0.0, bound_err = 0.0, qm_err = 0.0;
  std::size_t locus_miss = 0, flagged = 0;
  bool saw_qm = false;
  for (std::size_t i = 0; i < s.alpha1_points; ++i) {
    for (std::size_t j = 0; j < s.alpha2_points; ++j) {
      SvmParams p = base;
      p.alpha1 = axis(s.alpha1_min, s.alpha1_max, s.alpha1_points, i);
      p.alpha2 = axis(s.alpha2_min, s.alpha2_max, s.alpha2_points, j);
      ScanRow r;
      r.alpha1 = p.alpha1;
      r.alpha2 = p.alpha2;
      r.det_m = det_m(p);
      std::tie(r.lambda1, r.lambda2) = kinetic_eigenvalues(p);
      const auto tc = transport_coefficients(p);
      r.mu = tc.mu;
      r.kappa = tc.kappa;
      r.positive = kinetic_positivity(p);
      r.singular = is_singular(p);
      r.bound = uncertainty_lower_bound(p);
      out.rows.push_back(r);

      const double a1 = p.alpha1, a2 = p.alpha2;
      const double det = a2 / 2.0 - a1 * a1 * (0.5 + a2) * (0.5 + a2);
      det_err = std::max({det_err, std::abs(r.det_m - det),
                          std::abs(build_matrix(p).determinant() - det)});
      const double ref =
          4.0 * p.mass * p.dim * p.nu * p.nu * std::abs(det) / std::sqrt(p.nu * p.nu + tc.mu * tc.mu);
      bound_err = std::max(bound_err, std::abs(r.bound - ref));
      const bool on_locus =
          a2 >= 0.0 && std::abs(std::abs((2.0 * a2 + 1.0) * a1) - std::sqrt(2.0 * a2)) < 1e-12;
      if (on_locus != r.singular) ++locus_miss;
      if (r.singular) ++flagged;
      if (a1 == 0.0 && a2 == 0.5) {
        saw_qm = true;
        qm_err = std::abs(r.bound - 0.5 * p.hbar * p.dim);
      }
    }
  }
  out.checks.push_back({"det_formula", det_err <= 1e-12, det_err, 0.0, 1e-12});
  out.checks.push_back({"bound_formula", bound_err <= 1e-12, bound_err, 0.0, 1e-12});
  out.checks.push_back({"singular_locus", locus_miss == 0, static_cast<double>(locus_miss),
                        static_cast<double>(flagged), 0.0});
  if (saw_qm && base.is_quantum_point()) {
    out.checks.push_back({"quantum_point_bound", qm_err <= 1e-12, qm_err, 0.0, 1e-12});
  }
  return out;
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows) {
  CsvWriter csv(out);
  csv.header({"alpha1", "alpha2", "det_m", "lambda1", "lambda2", "mu", "kappa", "positive",
              "singular", "bound"});
  for (const auto& r : rows) {
    csv.row(r.alpha1, r.alpha2, r.det_m, r.lambda1, r.lambda2, r.mu, r.kappa, r.positive ? 1 : 0,
            r.singular ? 1 : 0, r.bound);
  }
}

RunResult scan_params(const RunConfig& c) {
  RunResult result;
  Artifacts art(c.out_dir);
  auto scan = scan_grid(c.scan, c.params);
  {
    auto out = art.open("scan.csv", result);
    write_scan_csv(out, scan.rows);
  }
  result.checks = std::move(scan.checks);
  write_summary(c, result, art);
  return result;
}

RunResult run(const RunConfig& config) {
  switch (config.scenario) {
    case Scenario::schrodinger:
    case Scenario::kostin:
    case Scenario::kanai:
      return run_wave(config);
    case Scenario::hydro:
      return run_hydro(config);
    case Scenario::param_scan:
      return scan_params(config);
    case Scenario::verify:
      return verify_suite(config);
  }
  return {};
}

}  // namespace svm
