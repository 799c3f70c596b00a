#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "svm/drift.hpp"
#include "svm/ensemble.hpp"
#include "svm/params.hpp"
#include "svm/wavefield.hpp"

namespace svm {

enum class Source { grid, ensemble };

const char* to_string(Source s);

// One time of an uncertainty report. delta_p is built from the e^{gamma t}
// scaled momenta and the bounds apply to the raw product delta_x * delta_p.
struct UncertaintyRow {
  double t = 0.0;
  double delta_x = 0.0;
  double delta_p = 0.0;
  double delta_p_phys = 0.0;  // e^{-gamma t} delta_p
  double corr = 0.0;          // m Cov(r, u_m)
  double bound_simple = 0.0;
  double bound_full = 0.0;
  double product = 0.0;
  double product_phys = 0.0;
  double product_se = 0.0;  // ensemble sources only
  bool momenta_defined = true;
};

struct UncertaintyReport {
  Source source = Source::grid;
  std::vector<UncertaintyRow> rows;
};

// Grid moments. Expectations are normalized by the total mass of rho.
double delta_x(const Grid1D& grid, std::span<const double> rho);
double delta_x(std::span<const double> samples);

// sqrt((Var p + Var pbar) / 2) with (p, pbar) = e^{gamma t} 2 m M (u, u_bwd).
// Throws SingularKineticMatrix.
double delta_p(const Grid1D& grid, const DriftSlice& slice, const SvmParams& params);
double delta_p(std::span<const double> p, std::span<const double> pbar);

double correlation_term(const Grid1D& grid, const DriftSlice& slice, const SvmParams& params);
double correlation_term(std::span<const double> r, std::span<const double> u_m,
                        const SvmParams& params);

UncertaintyReport grid_report(const DriftTable& table, const SvmParams& params);

// Ensemble report at every recorded time; product standard errors come from
// the spread over contiguous trajectory batches.
UncertaintyReport ensemble_report(const TrajectoryEnsemble& ensemble, const Momenta& momenta,
                                  const DriftTable& table, const SvmParams& params,
                                  std::size_t batches = 20);

struct InequalityCheck {
  double t = 0.0;
  bool holds = false;
  double margin = 0.0;  // product - bound_full
  double slack = 0.0;
};

// product >= bound_full >= bound_simple, with slack 3 SE (ensemble) or
// 1e-6 relative (grid). Rows with undefined momenta hold trivially.
std::vector<InequalityCheck> verify_inequality(const UncertaintyReport& report);

struct MomentComparison {
  // route a: operator moments of the wavefunction
  double p_mean_wave = 0.0;
  double p2_wave = 0.0;
  // route b: rho-weighted drift fields, E[m u], E[m u~], ((m u)^2 + (m u~)^2)/2
  double p_mean_fwd = 0.0;
  double p_mean_bwd = 0.0;
  double p2_field = 0.0;
  double var_field = 0.0;  // (Var[m u] + Var[m u~]) / 2
  // route c: ensemble samples (zero when absent)
  bool has_ensemble = false;
  double p_mean_ens = 0.0;
  double p2_ens = 0.0;
  double p2_ens_se = 0.0;

  double wave_vs_field() const;     // |p2_wave - p2_field| / p2_wave
  double ensemble_z_score() const;  // |p2_ens - p2_field| / p2_ens_se
};

// Requires the quantum point. p and pbar are optional ensemble momenta.
MomentComparison qm_oracle(const WaveField& state, const SvmParams& params,
                           std::span<const double> p = {}, std::span<const double> pbar = {});

// Operator-moment rows for Kanai snapshots: delta_p from -i hbar d_x,
// delta_p_phys = e^{-gamma t} delta_p, both bounds d hbar / 2.
UncertaintyReport kanai_report(std::span<const WaveField> snapshots, const SvmParams& params);

struct DissipativeRun {
  std::vector<WaveField> snapshots;
  std::vector<double> potential;
  double gamma = 0.0;
};

struct DissipativeComparison {
  UncertaintyReport kostin;
  UncertaintyReport kanai;
};

// Kostin rows use drift momenta; Kanai rows use operator moments of
// -i hbar d_x with delta_p_phys = e^{-gamma t} delta_p and bound d hbar / 2.
// Throws ConfigMismatch unless potential, gamma and initial state agree.
DissipativeComparison dissipative_comparison(const DissipativeRun& kostin,
                                             const DissipativeRun& kanai,
                                             const SvmParams& params);

// CSV: t,delta_x,delta_p,delta_p_phys,corr,bound_simple,bound_full,product,product_phys,source
void write_report_csv(std::ostream& out, const UncertaintyReport& report);

}  // namespace svm
