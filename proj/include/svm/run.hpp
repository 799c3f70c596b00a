#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "svm/config.hpp"
#include "svm/drift.hpp"
#include "svm/grid.hpp"
#include "svm/wavefield.hpp"

namespace svm {

struct CheckLine {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  double tol = 0.0;
};

// CHECK <name> <PASS|FAIL> measured=<v> bound=<v> tol=<v>
std::string format_check(const CheckLine& c);

struct RunResult {
  std::vector<CheckLine> checks;
  std::vector<std::filesystem::path> artifacts;

  bool all_pass() const;
};

enum class WaveDynamics { schrodinger, kostin, kanai };

struct WaveRun {
  DriftTable table;
  std::vector<WaveField> snapshots;  // at the table times
  std::vector<double> energy;        // <H> at the table times
  std::vector<double> norm;
};

// Steps the wave equation to t_final, recording drift slices and snapshots
// every output_every steps and at the end. t_final must be a whole number
// of steps.
WaveRun evolve_wave(const Grid1D& grid, const Potential& potential, const WaveField& initial,
                    const SvmParams& params, WaveDynamics dynamics, double dt, double t_final,
                    std::size_t output_every);

Potential make_potential(const Grid1D& grid, const PotentialSpec& spec, double mass);

// Runs the configured scenario and writes its artifacts and summary.txt to
// config.out_dir.
RunResult run(const RunConfig& config);

struct ScanRow {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double det_m = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  bool positive = false;
  bool singular = false;
  double bound = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<CheckLine> checks;  // closed-form re-evaluation of every row
};

// Row-major over alpha1, then alpha2; the other fields come from `base`.
ScanResult scan_grid(const ScanSpec& spec, const SvmParams& base);

// CSV: alpha1,alpha2,det_m,lambda1,lambda2,mu,kappa,positive,singular,bound
void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows);

// Writes scan.csv with det M, eigenvalues, transport coefficients, flags and
// bound for each (alpha1, alpha2) point.
RunResult scan_params(const RunConfig& config);

// Runs config.criteria with the configured seed, threads and verify.n_traj;
// criterion artifacts go to config.out_dir as c<id>_*.csv.
RunResult verify_suite(const RunConfig& config);

}  // namespace svm
