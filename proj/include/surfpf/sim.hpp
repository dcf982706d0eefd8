#pragma once

#include <functional>
#include <string>
#include <vector>

#include "surfpf/config.hpp"
#include "surfpf/diagnostics.hpp"

namespace surfpf {

enum class RunStatus { Completed, Diverged, NonFinite, SolverFailed, WallTimeExceeded, Stopped };

std::string to_string(RunStatus s);

/// Process exit code of a status: 0 for Completed and Stopped.
int exit_code(RunStatus s);

/// Exit code for an exception escaping a run: ConfigError 2, IoError 5,
/// anything else 1.
int exit_code_for_exception(const std::exception& e);

/// Called after every accepted step with the new record; returning false
/// ends the run with status Stopped.
using StepObserver = std::function<bool(const Stepper&, const TimeSeriesRecord&)>;

struct RunSummary {
  RunStatus status = RunStatus::Completed;
  std::string message;
  int steps = 0;
  double t_final = 0.0;
  int n_dofs = 0;
  double h = 0.0;
  double wall_seconds = 0.0;
  /// One record per step (t = 0 included), independent of output.csv_every.
  std::vector<TimeSeriesRecord> records;
};

/// Initial field of a run on a given space.
Eigen::VectorXd initial_field(const RunConfig& config, const TraceSpace& space);

/// Runs a single time integration on config.level and writes
/// diagnostics.csv and snap_<step>.vtk to config.out_dir. Failures during
/// time stepping are reported through the status, with the last good state
/// dumped to final_state.vtk. Configuration and I/O errors throw.
RunSummary run_simulation(const RunConfig& config, const StepObserver& observer = {});

struct LevelErrors {
  int level = 0;
  int n_dofs = 0;
  double h = 0.0;
  double dt = 0.0;
  double u_linf_l2 = 0.0;
  double u_l2_l2 = 0.0;
  double mu_linf_l2 = 0.0;  // Cahn-Hilliard only
  double mu_l2_l2 = 0.0;
  double wall_seconds = 0.0;
};

/// log2(e_coarse / e_fine).
double observed_rate(double coarse, double fine);

/// Manufactured-solution study on the unit sphere over config.levels with
/// dt = 2^-(1+level) on [0, validation_t_end]. Writes convergence.csv.
std::vector<LevelErrors> run_validation(const RunConfig& config);

struct SweepResult {
  double beta = 0.0;
  RunSummary summary;
};

/// One run per beta_s value, executed by config.workers threads. Run i
/// writes to out_dir/beta_<beta>, and sweep_summary.csv collects outcomes.
std::vector<SweepResult> run_sweep(const RunConfig& config);

/// Dispatch on config.experiment: validation, sweep, or a single run.
/// Returns the process exit code.
int run_experiment(const RunConfig& config);

}  // namespace surfpf
