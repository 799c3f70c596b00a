#include "svm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svm/errors.hpp"

namespace svm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected `key = value`");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    if (cfg.values_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": duplicate key " + key);
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path.string());
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
  read_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  if (!has(key)) {
    read_.insert(key);
    return fallback;
  }
  const auto text = get(key, "");
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError(origin_ + ": " + key + " = '" + text + "' is not a finite number");
  }
  return v;
}

long long ConfigFile::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) {
    read_.insert(key);
    return fallback;
  }
  const auto text = get(key, "");
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(origin_ + ": " + key + " = '" + text + "' is not an integer");
  }
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) {
    read_.insert(key);
    return fallback;
  }
  const auto text = get(key, "");
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(origin_ + ": " + key + " = '" + text + "' is not a boolean");
}

void ConfigFile::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!read_.count(k)) out.push_back(k);
  }
  return out;
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::schrodinger:
      return "schrodinger";
    case Scenario::kostin:
      return "kostin";
    case Scenario::kanai:
      return "kanai";
    case Scenario::hydro:
      return "hydro";
    case Scenario::param_scan:
      return "param-scan";
    case Scenario::verify:
      return "verify";
  }
  return "?";
}

namespace {

Scenario parse_scenario(const std::string& s) {
  for (auto sc : {Scenario::schrodinger, Scenario::kostin, Scenario::kanai, Scenario::hydro,
                  Scenario::param_scan, Scenario::verify}) {
    if (s == to_string(sc)) return sc;
  }
  throw ConfigError("unknown scenario '" + s + "'");
}

std::size_t positive_count(const ConfigFile& f, const std::string& key, long long fallback,
                           long long min = 1) {
  const auto v = f.get_int(key, fallback);
  if (v < min) throw ConfigError(key + " must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

double positive(const ConfigFile& f, const std::string& key, double fallback) {
  const double v = f.get_double(key, fallback);
  if (!(v > 0.0)) throw ConfigError(key + " must be > 0");
  return v;
}

std::vector<int> parse_criteria(const std::string& text) {
  std::vector<int> out;
  if (text == "all") {
    for (int i = 1; i <= 12; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || v < 1 || v > 12) {
      throw ConfigError("verify.criteria entry '" + item + "' is not in 1..12");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("verify.criteria is empty");
  return out;
}

}  // namespace

RunConfig parse_config(const ConfigFile& f) {
  RunConfig c;
  c.scenario = parse_scenario(f.get("scenario", "schrodinger"));

  c.grid.x_min = f.get_double("grid.x_min", c.grid.x_min);
  c.grid.x_max = f.get_double("grid.x_max", c.grid.x_max);
  c.grid.n_points = positive_count(f, "grid.n_points", 1001, 16);
  if (!(c.grid.x_max > c.grid.x_min)) throw ConfigError("grid.x_max must exceed grid.x_min");

  const auto pot = f.get("potential.kind", "harmonic");
  if (pot == "free") {
    c.potential.kind = Potential::Kind::free;
  } else if (pot == "harmonic") {
    c.potential.kind = Potential::Kind::harmonic;
  } else {
    throw ConfigError("potential.kind must be free or harmonic, got '" + pot + "'");
  }
  c.potential.omega = positive(f, "potential.omega", 1.0);

  const auto init = f.get("initial.kind", "ground");
  if (init == "ground") {
    c.initial = HarmonicGround{c.potential.omega};
  } else if (init == "coherent") {
    c.initial = HarmonicCoherent{c.potential.omega, f.get_double("initial.displacement", 1.0)};
  } else if (init == "gaussian") {
    c.initial = GaussianState{f.get_double("initial.center", 0.0),
                              positive(f, "initial.width", 1.0),
                              f.get_double("initial.wavenumber", 0.0)};
  } else {
    throw ConfigError("initial.kind must be ground, coherent or gaussian, got '" + init + "'");
  }

  const double mass = positive(f, "params.mass", 1.0);
  const double hbar = positive(f, "params.hbar", 1.0);
  const auto dim = f.get_int("params.dim", 1);
  if (dim < 1) throw ConfigError("params.dim must be >= 1");
  const double gamma = f.get_double("params.gamma", 0.0);
  if (f.get_bool("params.quantum", true)) {
    c.params = SvmParams::quantum(mass, hbar, static_cast<int>(dim), gamma);
  } else {
    c.params.mass = mass;
    c.params.hbar = hbar;
    c.params.dim = static_cast<int>(dim);
    c.params.gamma = gamma;
  }
  c.params.alpha1 = f.get_double("params.alpha1", c.params.alpha1);
  c.params.alpha2 = f.get_double("params.alpha2", c.params.alpha2);
  c.params.nu = f.get_double("params.nu", c.params.nu);
  try {
    c.params.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.require_positivity = f.get_bool("params.require_positivity", false);
  if (c.require_positivity && !kinetic_positivity(c.params)) {
    throw ConfigError("params: kinetic matrix is not positive definite at (alpha1, alpha2) = (" +
                      std::to_string(c.params.alpha1) + ", " +
                      std::to_string(c.params.alpha2) + ")");
  }

  c.dt = f.get_double("time.dt", c.scenario == Scenario::hydro ? 0.0 : 0.01);
  if (c.dt < 0.0 || (c.dt == 0.0 && c.scenario != Scenario::hydro)) {
    throw ConfigError("time.dt must be > 0");
  }
  c.t_final = f.get_double("time.t_final", 1.0);
  if (c.t_final < 0.0) throw ConfigError("time.t_final must be >= 0");
  c.output_every = positive_count(f, "time.output_every", 10);

  const auto n_traj = f.get_int("ensemble.n_traj", 0);
  if (n_traj < 0) throw ConfigError("ensemble.n_traj must be >= 0");
  c.n_traj = static_cast<std::size_t>(n_traj);
  const auto seed = f.get_int("ensemble.seed", 1);
  if (seed < 0) throw ConfigError("ensemble.seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.trajectory_csv_max = positive_count(f, "ensemble.trajectory_csv_max", 1000, 0);
  c.histogram_bins = positive_count(f, "ensemble.histogram_bins", 40);

  const auto form = f.get("hydro.form", "particle");
  if (form == "particle") {
    c.hydro.form = FluidForm::particle;
  } else if (form == "continuum") {
    c.hydro.form = FluidForm::continuum;
  } else {
    throw ConfigError("hydro.form must be particle or continuum");
  }
  const auto eos = f.get("hydro.eos", "quantum");
  if (eos == "quantum") {
    c.hydro.eos = BarotropicEos::quantum_only();
  } else if (eos == "polytrope") {
    const double n = f.get_double("hydro.eos_n", 2.0);
    if (n == 1.0) throw ConfigError("hydro.eos_n = 1 is degenerate");
    c.hydro.eos = BarotropicEos::polytrope(f.get_double("hydro.eos_k", 1.0), n);
  } else {
    throw ConfigError("hydro.eos must be quantum or polytrope");
  }
  c.hydro.dt_safety = positive(f, "hydro.dt_safety", 0.45);
  if (c.hydro.dt_safety > 1.0) throw ConfigError("hydro.dt_safety must be <= 1");
  c.hydro.compare_schrodinger = f.get_bool("hydro.compare_schrodinger", true);

  c.scan.alpha1_min = f.get_double("scan.alpha1_min", c.scan.alpha1_min);
  c.scan.alpha1_max = f.get_double("scan.alpha1_max", c.scan.alpha1_max);
  c.scan.alpha1_points = positive_count(f, "scan.alpha1_points", 11);
  c.scan.alpha2_min = f.get_double("scan.alpha2_min", c.scan.alpha2_min);
  c.scan.alpha2_max = f.get_double("scan.alpha2_max", c.scan.alpha2_max);
  c.scan.alpha2_points = positive_count(f, "scan.alpha2_points", 11);

  c.criteria = parse_criteria(f.get("verify.criteria", "all"));
  c.verify_n_traj = positive_count(f, "verify.n_traj", 100'000, 1000);

  const auto threads = f.get_int("run.threads", 1);
  if (threads < 1) throw ConfigError("run.threads must be >= 1");
  c.threads = static_cast<unsigned>(threads);
  c.out_dir = f.get("output.dir", c.out_dir.string());

  const bool wave = c.scenario == Scenario::schrodinger || c.scenario == Scenario::kostin ||
                    c.scenario == Scenario::kanai;
  if (wave && !c.params.is_quantum_point()) {
    throw ConfigError(std::string("scenario ") + to_string(c.scenario) +
                      " requires the quantum point (alpha1, alpha2) = (0, 1/2), nu = hbar/(2m)");
  }
  if (c.scenario == Scenario::hydro && c.dt > 0.0) {
    // Stability pre-check on the diffusive limit; the velocity limit is
    // re-checked every step.
    const double dx = (c.grid.x_max - c.grid.x_min) / static_cast<double>(c.grid.n_points - 1);
    const auto tc = transport_coefficients(c.params);
    const double limit = 0.25 * dx * dx / std::max({tc.mu, std::sqrt(tc.kappa), c.params.nu});
    if (c.dt > limit) {
      throw ConfigError("time.dt = " + std::to_string(c.dt) + " exceeds the hydro limit " +
                        std::to_string(limit));
    }
  }

  const auto unused = f.unused_keys();
  if (!unused.empty()) {
    std::string list;
    for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }
  return c;
}

}  // namespace svm
