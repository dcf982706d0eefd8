#include "surfpf/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

namespace surfpf {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// The Krylov solvers stop on their recursive residual; the contract is on
// the true residual, so a few warm restarts with a tighter tolerance follow
// when the two disagree.
constexpr int kRestarts = 4;

template <class Solver, class Matrix>
SolveResult run_iterative(Solver& solver, const Matrix& a, const Eigen::VectorXd& b,
                          const SolverConfig& config, double threshold, const Eigen::VectorXd* guess) {
  const double bnorm = b.norm();
  double tol = std::max(config.rel_tol, config.abs_tol / bnorm);
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw BreakdownError("preconditioner setup failed");

  Eigen::VectorXd x = guess ? *guess : Eigen::VectorXd::Zero(b.size());
  SolveResult result;
  double residual = std::numeric_limits<double>::infinity();
  // max_iter bounds the total over all tightened restarts.
  for (int attempt = 0; attempt <= kRestarts && result.stats.iterations < config.max_iter; ++attempt) {
    solver.setMaxIterations(config.max_iter - result.stats.iterations);
    solver.setTolerance(tol);
    x = solver.solveWithGuess(b, x);
    result.stats.iterations += static_cast<int>(solver.iterations());
    if (solver.info() == Eigen::NumericalIssue) throw BreakdownError("Krylov breakdown");
    if (!x.allFinite()) throw BreakdownError("Krylov iteration produced non-finite values");
    residual = (b - a * x).norm();
    if (residual <= threshold) break;
    tol *= 0.1;
  }
  result.x = std::move(x);
  result.stats.residual = residual;
  result.stats.threshold = threshold;
  if (residual > threshold)
    throw SolverNoConvergence("linear solver did not reach the residual contract", result.x, residual,
                              result.stats.iterations);
  return result;
}

template <class Matrix>
SolveResult dispatch(const Matrix& a, bool symmetric, const Eigen::VectorXd& b, const SolverConfig& config,
                     const Eigen::VectorXd* guess) {
  const double threshold = std::max(config.rel_tol * b.norm(), config.abs_tol);
  if (b.norm() == 0.0) return {Eigen::VectorXd::Zero(b.size()), {0, 0.0, threshold}};

  switch (config.method) {
    case SolverMethod::Direct: {
      ColMatrix col = a;
      Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
      lu.compute(col);
      if (lu.info() != Eigen::Success) throw SolverFailure("sparse LU factorization failed");
      SolveResult r;
      r.x = lu.solve(b);
      r.stats.residual = (b - a * r.x).norm();
      r.stats.threshold = threshold;
      if (r.stats.residual > threshold) {
        // one step of iterative refinement
        r.x += lu.solve(Eigen::VectorXd(b - a * r.x));
        r.stats.residual = (b - a * r.x).norm();
      }
      if (r.stats.residual > threshold)
        throw SolverNoConvergence("direct solve residual above contract", r.x, r.stats.residual, 1);
      return r;
    }
    case SolverMethod::ConjugateGradient: {
      if (!symmetric) throw SolverFailure("conjugate gradients require a symmetric operator");
      switch (config.preconditioner) {
        case Preconditioner::None: {
          Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> s;
          return run_iterative(s, a, b, config, threshold, guess);
        }
        case Preconditioner::Jacobi: {
          Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> s;
          return run_iterative(s, a, b, config, threshold, guess);
        }
        case Preconditioner::IncompleteFactorization: {
          ColMatrix col = a;
          Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> s;
          return run_iterative(s, col, b, config, threshold, guess);
        }
      }
      break;
    }
    case SolverMethod::StabilizedBiCG: {
      switch (config.preconditioner) {
        case Preconditioner::None: {
          Eigen::BiCGSTAB<Matrix, Eigen::IdentityPreconditioner> s;
          return run_iterative(s, a, b, config, threshold, guess);
        }
        case Preconditioner::Jacobi: {
          Eigen::BiCGSTAB<Matrix, Eigen::DiagonalPreconditioner<double>> s;
          return run_iterative(s, a, b, config, threshold, guess);
        }
        case Preconditioner::IncompleteFactorization: {
          Eigen::BiCGSTAB<Matrix, Eigen::IncompleteLUT<double>> s;
          return run_iterative(s, a, b, config, threshold, guess);
        }
      }
      break;
    }
    case SolverMethod::GMRES: {
      switch (config.preconditioner) {
        case Preconditioner::None: {
          Eigen::GMRES<Matrix, Eigen::IdentityPreconditioner> s;
          s.set_restart(config.restart);
          return run_iterative(s, a, b, config, threshold, guess);
        }
        case Preconditioner::Jacobi: {
          Eigen::GMRES<Matrix, Eigen::DiagonalPreconditioner<double>> s;
          s.set_restart(config.restart);
          return run_iterative(s, a, b, config, threshold, guess);
        }
        case Preconditioner::IncompleteFactorization: {
          Eigen::GMRES<Matrix, Eigen::IncompleteLUT<double>> s;
          s.set_restart(config.restart);
          return run_iterative(s, a, b, config, threshold, guess);
        }
      }
      break;
    }
  }
  throw SolverFailure("unsupported solver configuration");
}

}  // namespace

double SparseOperator::symmetry_defect() const {
  const SparseMatrix t = matrix.transpose();
  const SparseMatrix d = matrix - t;
  double diag = 0;
  for (int i = 0; i < matrix.rows(); ++i) diag = std::max(diag, std::abs(matrix.coeff(i, i)));
  double defect = 0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) defect = std::max(defect, std::abs(it.value()));
  return diag > 0 ? defect / diag : defect;
}

void SolverConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0)) throw ConfigError("solver tolerances must be positive");
  if (max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (restart < 1) throw ConfigError("solver.restart must be >= 1");
}

SolverConfig SolverConfig::allen_cahn_default() { return {}; }

SolverConfig SolverConfig::cahn_hilliard_default() {
  SolverConfig c;
  c.method = SolverMethod::GMRES;
  c.preconditioner = Preconditioner::IncompleteFactorization;
  return c;
}

SolverMethod parse_solver_method(const std::string& s) {
  if (s == "cg") return SolverMethod::ConjugateGradient;
  if (s == "bicgstab") return SolverMethod::StabilizedBiCG;
  if (s == "gmres") return SolverMethod::GMRES;
  if (s == "direct") return SolverMethod::Direct;
  throw ConfigError("unknown solver.method '" + s + "' (cg, bicgstab, gmres, direct)");
}

Preconditioner parse_preconditioner(const std::string& s) {
  if (s == "none") return Preconditioner::None;
  if (s == "jacobi") return Preconditioner::Jacobi;
  if (s == "ilu") return Preconditioner::IncompleteFactorization;
  throw ConfigError("unknown solver.preconditioner '" + s + "' (none, jacobi, ilu)");
}

SolveResult solve(const SparseOperator& A, const Eigen::VectorXd& b, const SolverConfig& config,
                  const Eigen::VectorXd* initial_guess) {
  config.validate();
  if (A.matrix.rows() != A.matrix.cols() || A.matrix.rows() != b.size())
    throw SolverFailure("dimension mismatch in linear solve");
  return dispatch(A.matrix, A.symmetric, b, config, initial_guess);
}

BlockSolution solve_block_2x2(const SparseMatrix& k11, const SparseMatrix& k12, const SparseMatrix& k21,
                              const SparseMatrix& k22, const Eigen::VectorXd& b1, const Eigen::VectorXd& b2,
                              const SolverConfig& config, const Eigen::VectorXd* initial_guess) {
  config.validate();
  const Eigen::Index n1 = k11.rows(), n2 = k22.rows();
  if (k11.cols() != n1 || k12.rows() != n1 || k12.cols() != n2 || k21.rows() != n2 || k21.cols() != n1 ||
      k22.cols() != n2 || b1.size() != n1 || b2.size() != n2)
    throw SolverFailure("block dimensions do not conform");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(k11.nonZeros() + k12.nonZeros() + k21.nonZeros() + k22.nonZeros());
  auto append = [&](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        triplets.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()), it.value());
  };
  append(k11, 0, 0);
  append(k12, 0, n1);
  append(k21, n1, 0);
  append(k22, n1, n1);
  SparseMatrix full(n1 + n2, n1 + n2);
  full.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd b(n1 + n2);
  b << b1, b2;
  SolveResult r = dispatch(full, false, b, config, initial_guess);
  return {r.x.head(n1), r.x.tail(n2), r.stats};
}

}  // namespace surfpf
