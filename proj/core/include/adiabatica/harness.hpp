#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adiabatica/commutator.hpp"
#include "adiabatica/evolve.hpp"
#include "adiabatica/registry.hpp"

namespace adiabatica {

struct ExperimentConfig {
  std::string example;
  ParamMap params;
  std::vector<double> eps;  // strictly decreasing
  std::optional<Metric> metric;
  double tol_step = kDefaultTolStep;
  Integrator integrator = Integrator::cf4;
  double rk4_step = 1e-4;
  int nogap_n = 8;
  Schedule schedule = Schedule::quantitative;
  std::string out_dir;      // empty: nothing written by run()
  bool write_profiles = false;
  bool write_svg = true;
  bool timing = false;      // runtime_ms stays 0 unless set, keeping reports byte-stable
  bool force = false;       // allow eps below floor_epsilon
  int jobs = 1;
  int probe_points = 11;    // commutator residual probes
};

// Geometric grid from hi down to lo.
std::vector<double> geometric_grid(double hi, double lo, int points);

// TOML text; the config's directory is not consulted, paths stay as written.
ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);
// Throws ConfigError on an empty or non-decreasing grid or bad tolerances.
void validate(const ExperimentConfig& cfg);

// ADIABATICA_JOBS when set and positive, else 1.
int default_jobs();

struct SweepRecord {
  double eps = 0.0;
  double sup_dev = 0.0;
  double adiab_resid = 0.0;
  double comm_resid = 0.0;  // NaN when no construction applies
  double runtime_ms = 0.0;
  std::vector<double> t;
  std::vector<double> profile;
  std::string profile_path;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% t-interval
  int points = 0;
  double lo() const { return slope - half_width; }
  double hi() const { return slope + half_width; }
};

// Least squares on (log eps, log value); needs >= 4 positive values.
SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& value);

struct ExperimentReport {
  std::string example;
  ExpectedRate expected;
  Metric metric = Metric::sup_norm;
  std::vector<SweepRecord> records;
  std::optional<SlopeFit> fit;
  std::string verdict;      // observed behaviour label
  bool verdict_pass = false;
  bool invariant_pass = true;
  std::vector<std::string> notes;

  int exit_code() const { return !invariant_pass ? 2 : (verdict_pass ? 0 : 1); }
  std::string csv() const;
};

// Decision rule against the expected rate; fills fit, verdict, verdict_pass.
void assess(ExperimentReport& r);

// One eps point; deterministic.
SweepRecord run_point(const Example& ex, double eps, const ExperimentConfig& cfg);

ExperimentReport run(const ExperimentConfig& cfg);

// CSV round trip for `plot`.
ExperimentReport read_report_csv(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Thresholds used by run() to flag invariant failures.
inline constexpr double kAdiabResidLimit = 1e-6;
inline constexpr double kCommResidLimit = 1e-6;

struct VerifyResult {
  InvariantReport checks;
  bool pass() const { return all_pass(checks); }
};
VerifyResult verify(const std::string& example, const ParamMap& params, double eps);

}  // namespace adiabatica
