#include "svm/drift.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "detail.hpp"
#include "svm/csv.hpp"
#include "svm/errors.hpp"

namespace svm {

void DriftTable::append(DriftSlice slice) {
  if (slice.rho.size() != grid.n_points) {
    throw InvalidParameters("drift slice size differs from table grid");
  }
  if (!times.empty() && !(slice.time > times.back())) {
    throw InvalidParameters("drift slices must be appended in increasing time");
  }
  times.push_back(slice.time);
  slices.push_back(std::move(slice));
}

std::size_t DriftTable::nearest_index(double t) const {
  if (times.empty()) throw InvalidParameters("empty drift table");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const auto hi = static_cast<std::size_t>(it - times.begin());
  return (times[hi] - t) < (t - times[hi - 1]) ? hi : hi - 1;
}

const DriftSlice& DriftTable::nearest(double t) const {
  return slices[nearest_index(t)];
}

DriftSlice extract_drifts(const WaveField& state, const SvmParams& params,
                          double rho_floor) {
  const std::size_t n = state.psi.size();
  const double dx = state.grid.dx();
  DriftSlice s;
  s.time = state.time;
  s.rho = state.density();
  s.u_m.assign(n, 0.0);
  s.u_fwd.assign(n, 0.0);
  s.u_bwd.assign(n, 0.0);
  const auto mask = detail::support_mask(s.rho, rho_floor);
  if (mask.empty) return s;
  std::vector<double> osm(n, 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (!mask.in[j]) continue;
    const double grad_theta =
        std::arg(std::conj(state.psi[j - 1]) * state.psi[j + 1]) / (2.0 * dx);
    s.u_m[j] = 2.0 * params.nu * grad_theta;
    osm[j] = params.nu * std::log(s.rho[j + 1] / s.rho[j - 1]) / (2.0 * dx);
  }
  detail::clamp_to_support(s.u_m, mask);
  detail::clamp_to_support(osm, mask);
  for (std::size_t j = 0; j < n; ++j) {
    s.u_fwd[j] = s.u_m[j] + osm[j];
    s.u_bwd[j] = s.u_m[j] - osm[j];
    s.u_m[j] = 0.5 * (s.u_fwd[j] + s.u_bwd[j]);
  }
  return s;
}

DriftTable decimate(const DriftTable& table, std::size_t stride) {
  const std::size_t n = table.grid.n_points;
  if (stride == 0 || (n - 1) % stride != 0) {
    throw InvalidParameters("decimation stride must divide n_points - 1");
  }
  DriftTable out;
  out.grid = Grid1D::make(table.grid.x_min, table.grid.x_max, (n - 1) / stride + 1);
  out.nu = table.nu;
  out.rho_floor = table.rho_floor;
  auto pick = [&](const std::vector<double>& v) {
    std::vector<double> r(out.grid.n_points);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = v[i * stride];
    return r;
  };
  for (const auto& s : table.slices) {
    out.append({s.time, pick(s.rho), pick(s.u_m), pick(s.u_fwd), pick(s.u_bwd)});
  }
  return out;
}

void write_drift_csv(std::ostream& out, const DriftTable& table) {
  CsvWriter csv(out);
  csv.header({"t", "x", "rho", "u_m", "u_fwd", "u_bwd"});
  for (const auto& s : table.slices) {
    for (std::size_t i = 0; i < table.grid.n_points; ++i) {
      csv.row(s.time, table.grid.x(i), s.rho[i], s.u_m[i], s.u_fwd[i], s.u_bwd[i]);
    }
  }
}

}  // namespace svm
