#pragma once

// Flat `key = value` run configuration with dotted section prefixes.
// Lines starting with '#' are comments.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "svm/hydro.hpp"
#include "svm/params.hpp"
#include "svm/wavefield.hpp"

namespace svm {

class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  // Keys never read through a getter.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
  mutable std::set<std::string> read_;
};

enum class Scenario { schrodinger, kostin, kanai, hydro, param_scan, verify };

const char* to_string(Scenario s);

struct GridSpec {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n_points = 1001;
};

struct PotentialSpec {
  Potential::Kind kind = Potential::Kind::harmonic;
  double omega = 1.0;
};

struct HydroSpec {
  FluidForm form = FluidForm::particle;
  BarotropicEos eos;
  double dt_safety = 0.45;  // fraction of the stability limit when time.dt is absent
  bool compare_schrodinger = true;
};

struct ScanSpec {
  double alpha1_min = -0.5;
  double alpha1_max = 0.5;
  std::size_t alpha1_points = 11;
  double alpha2_min = 0.0;
  double alpha2_max = 1.0;
  std::size_t alpha2_points = 11;
};

struct RunConfig {
  Scenario scenario = Scenario::schrodinger;
  GridSpec grid;
  PotentialSpec potential;
  InitialState initial = HarmonicGround{1.0};
  SvmParams params;
  bool require_positivity = false;

  double dt = 0.01;  // 0: hydro picks dt from the stability limit
  double t_final = 1.0;
  std::size_t output_every = 10;  // solver steps between recorded slices

  std::size_t n_traj = 0;
  std::uint64_t seed = 1;
  std::size_t trajectory_csv_max = 1000;  // size gate for trajectories.csv
  std::size_t histogram_bins = 40;

  HydroSpec hydro;
  ScanSpec scan;
  std::vector<int> criteria;  // verify.criteria, all by default
  std::size_t verify_n_traj = 100'000;

  unsigned threads = 1;
  std::filesystem::path out_dir = "svm-lab-out";
};

// Throws ConfigError on malformed or inconsistent settings (including
// positivity, stability-limit and quantum-point requirements).
RunConfig parse_config(const ConfigFile& file);

}  // namespace svm
