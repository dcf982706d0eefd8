#pragma once

#include <string>

#include <Eigen/Sparse>

#include "surfpf/errors.hpp"

namespace surfpf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Square sparse matrix in compressed-row layout plus a symmetry flag.
struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  int rows() const { return static_cast<int>(matrix.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix * x; }
  /// max |A - A^T| relative to max |diag A|.
  double symmetry_defect() const;
};

enum class SolverMethod { ConjugateGradient, StabilizedBiCG, GMRES, Direct };
enum class Preconditioner { None, Jacobi, IncompleteFactorization };

struct SolverConfig {
  SolverMethod method = SolverMethod::ConjugateGradient;
  Preconditioner preconditioner = Preconditioner::Jacobi;
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_iter = 5000;
  int restart = 50;

  void validate() const;
  static SolverConfig allen_cahn_default();
  static SolverConfig cahn_hilliard_default();
};

SolverMethod parse_solver_method(const std::string& s);
Preconditioner parse_preconditioner(const std::string& s);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;   // ||b - A x|| recomputed with a fresh mat-vec
  double threshold = 0.0;  // max(rel_tol ||b||, abs_tol)
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveStats stats;
};

/// NoConvergence carrying the best iterate.
class SolverNoConvergence : public NoConvergence {
 public:
  SolverNoConvergence(const std::string& what, Eigen::VectorXd best, double residual, int iterations)
      : NoConvergence(what, residual, iterations), best_(std::move(best)) {}
  const Eigen::VectorXd& best_iterate() const { return best_; }

 private:
  Eigen::VectorXd best_;
};

/// Solves A x = b so that ||A x - b|| <= max(rel_tol ||b||, abs_tol).
/// Conjugate gradients require A.symmetric.
SolveResult solve(const SparseOperator& A, const Eigen::VectorXd& b, const SolverConfig& config,
                  const Eigen::VectorXd* initial_guess = nullptr);

struct BlockSolution {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
  SolveStats stats;
};

/// Assembles [[K11, K12], [K21, K22]] monolithically and solves it.
BlockSolution solve_block_2x2(const SparseMatrix& k11, const SparseMatrix& k12, const SparseMatrix& k21,
                              const SparseMatrix& k22, const Eigen::VectorXd& b1, const Eigen::VectorXd& b2,
                              const SolverConfig& config, const Eigen::VectorXd* initial_guess = nullptr);

}  // namespace surfpf
