// SPDX-License-Identifier: BSD-3-Clause
//
// Study driver reproducing the experimental protocols: constant-step
// convergence studies against a fine reference, efficiency tables,
// solver-tolerance sweeps, and preconditioner scaling studies.

#ifndef MULTIRATE_HARNESS_HPP_
#define MULTIRATE_HARNESS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "multirate/models.hpp"
#include "multirate/mri.hpp"
#include "multirate/partitioned_system.hpp"
#include "multirate/sdc.hpp"

namespace multirate {

// Thrown for malformed study configurations (exit code 2 in the CLI).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MethodSpec {
  enum class Family { Erk, Sdc, Mrsdc, Mri, ArkImex };
  Family family = Family::Erk;
  std::string selector;      // as written, e.g. "imex-mri4-10"
  std::string table_name;    // erk table
  std::string coupling_name; // mri coupling
  std::string fast_table;    // mri inner table
  int m = 1;                 // fast substeps per slow step
  int X = 3, Y = 3, Z = 1;
  int sweeps = 4;
  bool needs_implicit_solver = false;
};

// Selector grammar: erk-<table> | sdc | sdc-<sweeps> | mrsdc-XYZ |
// mri3-<m> | imex-mri3-<m> | imex-mri4-<m> | ark-imex.
MethodSpec parse_method(const std::string& selector);
std::vector<std::string> known_method_selectors();

struct StudyConfig {
  // [problem]
  std::string problem_kind = "linear-two-rate";
  BrusselatorPdeConfig pde;
  LinearTwoRateOde linear = LinearTwoRateOde::default_problem();

  // [study]
  std::vector<std::string> methods;
  std::vector<double> h_list;
  double t0 = 0.0;
  double tf = 1.0;
  std::string error_component = "all"; // all | u | v | w | 0 | 1
  // [solver]
  double newton_tol = 1.0e-10;
  double gmres_tol = 1.0e-10;
  int newton_max_iters = 10;
  int gmres_max_iters = 100;
  bool precondition = false;
  std::map<double, double> tolerance_table; // per-H override

  // [reference]
  std::string reference_method = "cash-karp5"; // or "analytic"
  double h_ref = 0.0;                          // 0 => auto

  // [tolerance-sweep]
  double sweep_tol_coarse = 1.0e-1;
  double sweep_tol_fine = 1.0e-15;

  // [precond-study]
  std::vector<int> precond_grids = {32, 64, 128};
  std::vector<double> precond_rho_ds = {1.0e3, 1.0e4};
  int precond_steps = 8;
  std::string precond_method = "imex-mri3-10";

  // [output]
  std::string out_dir = ".";
  unsigned seed = 0;
  int jobs = 1;

  void validate() const;
};

StudyConfig load_study_config(const std::string& path);

struct RunRecord {
  std::string method;
  double H = 0.0;
  double tolerance = 0.0; // solver tolerance used (0 = explicit method)
  double error = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  long steps = 0;
  EvalCounters counters;
  bool diverged = false;
  std::string note;
};

struct RunReport {
  std::vector<RunRecord> rows;
  std::map<std::string, double> fitted_slopes; // per method

  void write_csv(const std::string& path) const;
  // cfg, when given, is echoed into the summary (problem, methods,
  // seed, jobs) so reruns are comparable.
  void write_json(const std::string& path,
                  const struct StudyConfig* cfg = nullptr) const;
};

// Problem instance materialized from a StudyConfig.
struct ProblemInstance {
  PartitionedSystem system;
  StateVector y0;
  std::size_t component_offset = 0; // error-measurement slice
  std::size_t component_count = 0;  // 0 = whole vector
  std::function<Preconditioner(double)> precond_factory;
  std::optional<LinearTwoRateOde> linear;
  std::optional<BrusselatorPdeConfig> pde;
};

ProblemInstance make_problem(const StudyConfig& cfg);

// Error of `state` against `reference` in the configured component
// max norm.
double measure_error(const ProblemInstance& problem, const StateVector& state,
                     const StateVector& reference);

struct RunOutcome {
  StateVector final_state;
  EvalCounters counters;
  double wall_seconds = 0.0;
  long steps = 0;
  bool diverged = false;
  std::string message;
};

// Integrates one method at one step size; divergence is recorded, not
// thrown. tolerance_override replaces the configured solver tolerance.
RunOutcome run_method(const MethodSpec& spec, const ProblemInstance& problem,
                      const StudyConfig& cfg, double H,
                      double tolerance_override = 0.0);

RunReport run_convergence_study(const StudyConfig& cfg);
RunReport run_efficiency_study(const StudyConfig& cfg);

struct ToleranceSweepRow {
  std::string method;
  double H = 0.0;
  double tolerance = 0.0;
  double error_vs_tightest = 0.0; // relative perturbation
  bool selected = false;          // coarsest tolerance under 0.01
};

struct ToleranceSweepReport {
  std::vector<ToleranceSweepRow> rows;
  void write_csv(const std::string& path) const;
};

ToleranceSweepReport run_tolerance_sweep(const StudyConfig& cfg);

struct PrecondStudyRow {
  int grid = 0;
  double rho_d = 0.0;
  bool preconditioned = false;
  double wall_seconds = 0.0;
  std::size_t nonlinear_iters = 0;
  std::size_t linear_iters = 0;
  std::size_t precond_solves = 0;
};

struct PrecondStudyReport {
  std::vector<PrecondStudyRow> rows;
  void write_csv(const std::string& path) const;
};

PrecondStudyReport run_preconditioner_study(const StudyConfig& cfg);

// least-squares slope of log(error) vs log(H) over the finite tail
double fitted_slope(const std::vector<std::pair<double, double>>& h_and_error);

int cli_main(int argc, char** argv);

} // namespace multirate

#endif // MULTIRATE_HARNESS_HPP_
