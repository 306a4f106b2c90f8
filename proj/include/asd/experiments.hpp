#pragma once

// Named experiments wiring targets, grids, samplers and statistics together.
// Every experiment is a pure function of its config: identical configs give
// byte-identical outputs for any thread count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "asd/common.hpp"
#include "asd/oracle.hpp"

namespace asd {

using Json = nlohmann::ordered_json;

enum class Experiment { VerifyGrs, Correctness, Exchangeability, Scaling, Reparam, Speedup };

class UnknownExperiment : public Error {
 public:
  using Error::Error;
};

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct TargetSpec {
  std::string name;
  MixtureTarget target;
};

/// "two-point", "gaussian" or "mixture3" in dimension d.
TargetSpec builtin_target(const std::string& family, int dim);

/// Pass/fail thresholds; defaults are the acceptance thresholds.
struct Thresholds {
  double p_min = 0.01;          // two-sample tests must exceed this
  double se_mult = 4.0;         // moment / rate agreement in standard errors
  double ks_level = 0.001;      // family-wise KS level (Bonferroni)
  double control_p_max = 0.001; // violated control must fall below this
  double slope_min = 0.55;
  double slope_max = 0.80;
  double r2_min = 0.98;
  double speedup_min = 2.0;
  double reparam_tol = 1e-9;
  double roundtrip_tol = 1e-8;
};

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  Experiment experiment = Experiment::Correctness;
  std::vector<TargetSpec> targets;
  int d = 2;
  std::vector<int> K{200};
  double T = 20.0;
  std::optional<int> theta;
  std::vector<std::uint64_t> seeds{0};
  std::size_t n_samples = 0;
  std::size_t threads = 0;  // 0: $ASD_THREADS or hardware concurrency
  std::string output = "results";
  int n_perm = 500;
  std::string grid = "uniform";  // or "geometric"
  double grid_first_time = 1e-3;
  bool refresh_tape = false;
  bool dump_traj = false;

  // verify-grs
  std::vector<double> grs_shifts{0.0, 1.0, 2.0, 3.0};  // |v| in units of sigma
  std::vector<int> grs_dims{1, 4};
  double sigma = 0.7;

  // exchangeability
  int exch_m = 4;
  double exch_eta = 0.5;
  double exch_t_start = 1.0;
  int control_n_perm = 1999;

  // reparam
  std::vector<std::string> schedules{"ou", "ve:1"};
  double ddpm_T = 4.0;

  // scaling: also run the fixed-step-size variant (eta = T / K_min) as a
  // labelled diagnostic that does not affect the verdict.
  bool fixed_eta_diagnostic = true;

  Thresholds thresholds;
};

/// Defaults matching the acceptance criteria for each experiment.
ExperimentConfig default_config(Experiment e);

Json to_json(const ExperimentConfig& c);
/// Strict: unknown keys, wrong types or invalid values throw ConfigError.
ExperimentConfig config_from_json(const Json& j);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

struct ExperimentOutput {
  bool passed = false;
  std::vector<Check> checks;
  Json results;     // serialized to <experiment>.json
  std::string csv;  // serialized to <experiment>.csv
  std::vector<OutputFile> extra_files;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Writes <dir>/<experiment>.json, <dir>/<experiment>.csv and extra files.
/// Throws OutputError when the directory cannot be created or written.
class OutputError : public Error {
 public:
  using Error::Error;
};
void write_outputs(const ExperimentConfig& config, const ExperimentOutput& out,
                   const std::string& dir);

/// Aggregates result files written by run_experiment into a text table.
/// Throws InputError on an empty list or an unrecognized file.
std::string summarize(const std::vector<std::string>& paths);

/// %.17g
std::string format_double(double v);

}  // namespace asd
