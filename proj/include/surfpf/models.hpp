#pragma once

#include <functional>

#include "surfpf/linear_solver.hpp"
#include "surfpf/trace_fe.hpp"

namespace surfpf {

struct ModelParams {
  double epsilon = 0.1;
  double alpha = 1.0;
  double rho = 1.0;
  double xi = 1.0;
  double beta_s = 1.0;
  /// Use the row-sum lumped mass for the nonlinear term instead of M f0'(u).
  bool lumped_nonlinearity = false;
  /// Keep the beta_s term in first-order steps as beta_s (u^k - u^{k-1}).
  bool first_step_beta = false;

  /// Throws ConfigError unless epsilon, alpha, rho, xi > 0 and beta_s >= 0.
  void validate() const;
};

/// Double-well potential (xi/4) u^2 (1-u)^2.
double f0(double u, double xi = 1.0);
/// (xi/2) u (1-u) (1-2u).
double f0_prime(double u, double xi = 1.0);
double f0_double_prime(double u, double xi = 1.0);
/// Degenerate mobility c(1-c) with c clipped to [0, 1].
double mobility(double c);

Eigen::VectorXd f0_prime(const Eigen::VectorXd& u, double xi);

/// (3u^k - 4u^{k-1} + u^{k-2}) / (2 dt).
Eigen::VectorXd bdf2_time_derivative(const Eigen::VectorXd& u_k, const Eigen::VectorXd& u_km1,
                                     const Eigen::VectorXd& u_km2, double dt);
/// 2u^{k-1} - u^{k-2}.
Eigen::VectorXd extrapolate(const Eigen::VectorXd& u_km1, const Eigen::VectorXd& u_km2);

/// Time-independent operators of a trace space. All three share one sparsity
/// pattern, so linear combinations are formed on the value arrays.
struct Operators {
  SparseOperator mass;
  SparseOperator stiffness;
  SparseOperator stabilization;
  Eigen::VectorXd lumped_mass;
  double h = 0.0;

  static Operators assemble(const TraceSpace& space);
  int n_dofs() const { return mass.rows(); }
};

/// a*A + b*B + c*C for operators that share a sparsity pattern.
SparseOperator combine(double a, const SparseOperator& A, double b, const SparseOperator& B, double c,
                       const SparseOperator& C);

/// Load vector of the source term at time t (zero if empty).
using Forcing = std::function<Eigen::VectorXd(double t)>;

/// Solution history for the BDF2 schemes. u holds the newest level, u_prev
/// and u_prev2 the two before it. For Cahn-Hilliard u is the concentration
/// and mu the chemical potential of the newest level.
struct StepperState {
  FieldVector u;
  FieldVector u_prev;
  FieldVector u_prev2;
  FieldVector mu;
  int k = 0;
  double t = 0.0;
  /// Consecutive steps taken with last_dt since the last restart.
  int history = 0;
  double last_dt = 0.0;

  /// True when a second-order step with this dt can use the stored history.
  bool can_use_bdf2(double dt) const { return history >= 1 && dt == last_dt; }
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;
  bool first_order = false;
};

/// One Allen-Cahn step of the stabilized semi-implicit BDF2 scheme. Requires
/// state.can_use_bdf2(dt).
StepReport ac_step(StepperState& state, const Operators& ops, const ModelParams& params, double dt,
                   const SolverConfig& solver, const Forcing& forcing = {});
/// Backward-Euler start of the Allen-Cahn scheme with constant extrapolation
/// of f0'. The beta_s term becomes beta_s (u^1 - u^0) unless
/// params.first_step_beta is false, in which case it is dropped.
StepReport ac_first_step(StepperState& state, const Operators& ops, const ModelParams& params, double dt,
                         const SolverConfig& solver, const Forcing& forcing = {});

/// One Cahn-Hilliard step for (c, mu). The mobility-weighted stiffness is
/// reassembled from the extrapolated concentration.
StepReport ch_step(StepperState& state, const TraceSpace& space, const Operators& ops,
                   const ModelParams& params, double dt, const SolverConfig& solver,
                   const Forcing& forcing = {});
StepReport ch_first_step(StepperState& state, const TraceSpace& space, const Operators& ops,
                         const ModelParams& params, double dt, const SolverConfig& solver,
                         const Forcing& forcing = {});

enum class Model { AllenCahn, CahnHilliard };

/// Drives one of the schemes through a sequence of time steps, restarting
/// with a first-order step whenever dt changes.
class Stepper {
 public:
  Stepper(Model model, const TraceSpace& space, const Operators& ops, ModelParams params,
          SolverConfig solver);

  void set_forcing(Forcing forcing) { forcing_ = std::move(forcing); }
  /// Sets u^0 at time t0. For Cahn-Hilliard mu^0 is f0'(c^0).
  void initialize(const Eigen::VectorXd& u0, double t0 = 0.0);
  /// Throws NonFiniteState if the new level is not finite.
  StepReport advance(double dt);

  Model model() const { return model_; }
  const StepperState& state() const { return state_; }
  const ModelParams& params() const { return params_; }

 private:
  Model model_;
  const TraceSpace& space_;
  const Operators& ops_;
  ModelParams params_;
  SolverConfig solver_;
  Forcing forcing_;
  StepperState state_;
};

}  // namespace surfpf
