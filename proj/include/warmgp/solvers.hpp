#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "warmgp/common.hpp"

namespace warmgp {

enum class SolverKind { Cg, Ap, Sgd };

const char* to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

/// Settings for the batched SPD solvers. Column 0 of the right-hand side is
/// the mean system (tolerance tol_mean); remaining columns are probe systems
/// (tolerance tol_samples). max_iterations = 0 picks the per-kind default:
/// 10 n for CG, 1000 epochs for AP, 100 n / minibatch steps for SGD.
struct SolverConfig {
  SolverKind kind = SolverKind::Cg;
  double tol_mean = 0.01;
  double tol_samples = 0.1;
  int max_iterations = 0;
  int block_size = 2000;     // AP; clamped to n
  int minibatch_size = 1000; // SGD; clamped to n
  double momentum = 0.9;     // SGD
  double learning_rate = 10.0; // SGD; see grid_search_sgd_lr
  std::uint64_t seed = 0;    // SGD minibatch sampling

  void validate() const;
};

/// Result of one batched solve. `residuals` holds the solver's tracked
/// residuals (a recurrence for CG, incrementally maintained for AP, a
/// sparsely updated estimate for SGD); `per_column_relative_residual` is
/// recomputed exactly from the returned solutions.
struct SolveState {
  Eigen::MatrixXd solutions;
  Eigen::MatrixXd residuals;
  Eigen::VectorXd per_column_relative_residual;
  std::vector<bool> converged;
  int iterations_used = 0;

  bool all_converged() const;
};

/// Solves H V = rhs for all columns simultaneously, starting from `init`.
/// Iteration counting unit: CG iterations, AP epochs, SGD steps.
SolveState solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                 const Eigen::MatrixXd& init, const SolverConfig& config);

/// Zero-initialized convenience overload.
SolveState solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                 const SolverConfig& config);

/// Conjugate gradients, per-column stopping, residual recurrence refreshed
/// by exact recomputation every 50 iterations.
SolveState cg_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                    const Eigen::MatrixXd& init, double tol_mean, double tol_samples,
                    int max_iterations);

/// Alternating projections: block Gauss-Seidel sweeps over contiguous index
/// blocks in fixed order, each block solved exactly from a cached Cholesky
/// factor; the residual is updated incrementally and refreshed exactly once
/// per epoch.
SolveState ap_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                    const Eigen::MatrixXd& init, double tol_mean, double tol_samples,
                    int block_size, int max_epochs);

/// Stochastic gradient descent with momentum on the quadratic objective.
/// Each step samples a minibatch of rows without replacement, computes those
/// residual rows exactly, applies a momentum update restricted to them, and
/// overwrites the stored residual estimate rows in place.
SolveState sgd_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                     const Eigen::MatrixXd& init, double tol_mean, double tol_samples,
                     int minibatch_size, double momentum, double learning_rate,
                     int max_steps, std::uint64_t seed);

}  // namespace warmgp
