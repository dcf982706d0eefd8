#include "surfpf/models.hpp"

#include <algorithm>

#include "surfpf/errors.hpp"

namespace surfpf {

void ModelParams::validate() const {
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (!(alpha > 0)) throw ConfigError("alpha must be positive");
  if (!(rho > 0)) throw ConfigError("rho must be positive");
  if (!(xi > 0)) throw ConfigError("xi must be positive");
  if (!(beta_s >= 0)) throw ConfigError("beta_s must be nonnegative");
}

double f0(double u, double xi) {
  const double v = u * (1.0 - u);
  return 0.25 * xi * v * v;
}

double f0_prime(double u, double xi) { return 0.5 * xi * u * (1.0 - u) * (1.0 - 2.0 * u); }

double f0_double_prime(double u, double xi) { return 0.5 * xi * (1.0 - 6.0 * u + 6.0 * u * u); }

double mobility(double c) {
  const double v = std::clamp(c, 0.0, 1.0);
  return v * (1.0 - v);
}

Eigen::VectorXd f0_prime(const Eigen::VectorXd& u, double xi) {
  return u.unaryExpr([xi](double v) { return f0_prime(v, xi); });
}

Eigen::VectorXd bdf2_time_derivative(const Eigen::VectorXd& u_k, const Eigen::VectorXd& u_km1,
                                     const Eigen::VectorXd& u_km2, double dt) {
  return (3.0 * u_k - 4.0 * u_km1 + u_km2) / (2.0 * dt);
}

Eigen::VectorXd extrapolate(const Eigen::VectorXd& u_km1, const Eigen::VectorXd& u_km2) {
  return 2.0 * u_km1 - u_km2;
}

Operators Operators::assemble(const TraceSpace& space) {
  Operators ops;
  ops.mass = space.assemble_surface_mass();
  ops.stiffness = space.assemble_tangential_stiffness();
  ops.stabilization = space.assemble_normal_stabilization();
  ops.lumped_mass = ops.mass.matrix * Eigen::VectorXd::Ones(ops.mass.rows());
  ops.h = space.h();
  return ops;
}

SparseOperator combine(double a, const SparseOperator& A, double b, const SparseOperator& B, double c,
                       const SparseOperator& C) {
  const Eigen::Index nnz = A.matrix.nonZeros();
  if (B.matrix.nonZeros() != nnz || C.matrix.nonZeros() != nnz || B.rows() != A.rows() || C.rows() != A.rows())
    throw Error("combine requires operators with a common sparsity pattern");
  SparseOperator out = A;
  out.symmetric = A.symmetric && B.symmetric && C.symmetric;
  double* v = out.matrix.valuePtr();
  const double* va = A.matrix.valuePtr();
  const double* vb = B.matrix.valuePtr();
  const double* vc = C.matrix.valuePtr();
  for (Eigen::Index i = 0; i < nnz; ++i) v[i] = a * va[i] + b * vb[i] + c * vc[i];
  return out;
}

namespace {

Eigen::VectorXd nonlinear_load(const Operators& ops, const ModelParams& params, const Eigen::VectorXd& f) {
  if (params.lumped_nonlinearity) return ops.lumped_mass.cwiseProduct(f);
  return ops.mass.matrix * f;
}

void check_finite(const Eigen::VectorXd& u, const char* what) {
  if (!u.allFinite()) throw NonFiniteState(std::string("non-finite values in ") + what);
}

void shift(StepperState& s, Eigen::VectorXd u_new, double dt) {
  s.u_prev2.values = std::move(s.u_prev.values);
  s.u_prev.values = std::move(s.u.values);
  s.u.values = std::move(u_new);
  s.history = (dt == s.last_dt) ? s.history + 1 : 1;
  s.last_dt = dt;
  s.t += dt;
  ++s.k;
}

StepReport ac_solve(StepperState& state, const Operators& ops, const ModelParams& params, double dt,
                    const SolverConfig& solver, const Forcing& forcing, bool first) {
  const double ee = params.epsilon * params.epsilon;
  const Eigen::VectorXd& u1 = state.u.values;
  Eigen::VectorXd rhs;
  Eigen::VectorXd guess;
  SparseOperator K;
  if (first) {
    const double beta = params.first_step_beta ? params.beta_s : 0.0;
    K = combine(1.0 / dt + beta, ops.mass, params.alpha * ee, ops.stiffness, ee * ops.h, ops.stabilization);
    rhs = ops.mass.matrix * ((1.0 / dt + beta) * u1) - params.alpha * nonlinear_load(ops, params, f0_prime(u1, params.xi));
    guess = u1;
  } else {
    const Eigen::VectorXd& u2 = state.u_prev.values;
    K = combine(1.5 / dt + params.beta_s, ops.mass, params.alpha * ee, ops.stiffness, ee * ops.h,
                ops.stabilization);
    guess = extrapolate(u1, u2);
    const Eigen::VectorXd f = 2.0 * f0_prime(u1, params.xi) - f0_prime(u2, params.xi);
    rhs = ops.mass.matrix * ((4.0 * u1 - u2) / (2.0 * dt) + params.beta_s * guess) -
          params.alpha * nonlinear_load(ops, params, f);
  }
  if (forcing) rhs += forcing(state.t + dt);
  SolveResult r = solve(K, rhs, solver, &guess);
  check_finite(r.x, "the Allen-Cahn solution");
  shift(state, std::move(r.x), dt);
  return {r.stats.iterations, r.stats.residual, first};
}

StepReport ch_solve(StepperState& state, const TraceSpace& space, const Operators& ops, const ModelParams& params,
                    double dt, const SolverConfig& solver, const Forcing& forcing, bool first) {
  const double ee = params.epsilon * params.epsilon;
  const Eigen::VectorXd& c1 = state.u.values;
  const Eigen::VectorXd c_hat = first ? c1 : extrapolate(c1, state.u_prev.values);
  const SparseOperator Aw = space.assemble_tangential_stiffness(c_hat, [](double c) { return mobility(c); });
  const SparseOperator K12 = combine(1.0, Aw, ops.h, ops.stabilization, 0.0, ops.mass);

  SparseOperator K11, K21;
  Eigen::VectorXd b1, b2;
  if (first) {
    K11 = combine(params.rho / dt, ops.mass, 0.0, ops.mass, 0.0, ops.mass);
    const double beta = params.first_step_beta ? params.beta_s : 0.0;
    K21 = combine(-beta, ops.mass, -ee, ops.stiffness, -ee * ops.h, ops.stabilization);
    b1 = ops.mass.matrix * (params.rho / dt * c1);
    b2 = nonlinear_load(ops, params, f0_prime(c1, params.xi)) - beta * (ops.mass.matrix * c1);
  } else {
    const Eigen::VectorXd& c2 = state.u_prev.values;
    K11 = combine(1.5 * params.rho / dt, ops.mass, 0.0, ops.mass, 0.0, ops.mass);
    K21 = combine(-params.beta_s, ops.mass, -ee, ops.stiffness, -ee * ops.h, ops.stabilization);
    b1 = ops.mass.matrix * (params.rho / (2.0 * dt) * (4.0 * c1 - c2));
    const Eigen::VectorXd f = 2.0 * f0_prime(c1, params.xi) - f0_prime(c2, params.xi);
    b2 = nonlinear_load(ops, params, f) - params.beta_s * (ops.mass.matrix * c_hat);
  }
  if (forcing) b1 += forcing(state.t + dt);

  Eigen::VectorXd guess(2 * c1.size());
  guess << c_hat, state.mu.values;
  BlockSolution sol = solve_block_2x2(K11.matrix, K12.matrix, K21.matrix, ops.mass.matrix, b1, b2, solver, &guess);
  check_finite(sol.first, "the Cahn-Hilliard concentration");
  check_finite(sol.second, "the Cahn-Hilliard chemical potential");
  state.mu.values = std::move(sol.second);
  shift(state, std::move(sol.first), dt);
  return {sol.stats.iterations, sol.stats.residual, first};
}

void require_bdf2(const StepperState& state, double dt) {
  if (!state.can_use_bdf2(dt)) throw Error("second-order step requested without a matching history");
}

}  // namespace

StepReport ac_step(StepperState& state, const Operators& ops, const ModelParams& params, double dt,
                   const SolverConfig& solver, const Forcing& forcing) {
  require_bdf2(state, dt);
  return ac_solve(state, ops, params, dt, solver, forcing, false);
}

StepReport ac_first_step(StepperState& state, const Operators& ops, const ModelParams& params, double dt,
                         const SolverConfig& solver, const Forcing& forcing) {
  return ac_solve(state, ops, params, dt, solver, forcing, true);
}

StepReport ch_step(StepperState& state, const TraceSpace& space, const Operators& ops,
                   const ModelParams& params, double dt, const SolverConfig& solver, const Forcing& forcing) {
  require_bdf2(state, dt);
  return ch_solve(state, space, ops, params, dt, solver, forcing, false);
}

StepReport ch_first_step(StepperState& state, const TraceSpace& space, const Operators& ops,
                         const ModelParams& params, double dt, const SolverConfig& solver,
                         const Forcing& forcing) {
  return ch_solve(state, space, ops, params, dt, solver, forcing, true);
}

Stepper::Stepper(Model model, const TraceSpace& space, const Operators& ops, ModelParams params,
                 SolverConfig solver)
    : model_(model), space_(space), ops_(ops), params_(params), solver_(solver) {
  params_.validate();
  solver_.validate();
}

void Stepper::initialize(const Eigen::VectorXd& u0, double t0) {
  if (u0.size() != ops_.n_dofs()) throw Error("initial field has the wrong length");
  check_finite(u0, "the initial field");
  const FieldTag tag = model_ == Model::AllenCahn ? FieldTag::OrderParameter : FieldTag::Concentration;
  state_ = StepperState{};
  state_.u = {u0, tag};
  state_.u_prev = {u0, tag};
  state_.u_prev2 = {u0, tag};
  if (model_ == Model::CahnHilliard) state_.mu = {f0_prime(u0, params_.xi), FieldTag::ChemicalPotential};
  state_.t = t0;
}

StepReport Stepper::advance(double dt) {
  if (!(dt > 0)) throw Error("time step must be positive");
  const bool first = !state_.can_use_bdf2(dt);
  if (model_ == Model::AllenCahn) return ac_solve(state_, ops_, params_, dt, solver_, forcing_, first);
  return ch_solve(state_, space_, ops_, params_, dt, solver_, forcing_, first);
}

}  // namespace surfpf
