#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "warmgp/estimator.hpp"
#include "warmgp/kernel.hpp"
#include "warmgp/solvers.hpp"

namespace warmgp {

/// warm: fixed probes, solver initialized at the previous step's solutions.
/// cold: probes resampled each step, solver initialized at zero.
/// cold_fixed: fixed probes but zero initialization (isolates the two
/// ingredients of warm starting).
enum class TrainMode { WarmStartFixedProbes, ColdStartResampled, ColdStartFixedProbes };

const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct TrainConfig {
  int steps = 100;
  double learning_rate = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int num_probes = 16;
  ProbeDistribution probe_distribution = ProbeDistribution::Gaussian;
  TrainMode mode = TrainMode::WarmStartFixedProbes;
  SolverConfig solver;
  double init_constrained = 1.0;  // initial value of every constrained hyperparameter
  std::uint64_t seed = 0;
  bool record_solver_state = false;  // keep per-step init/solutions in the trace (tests)

  void validate() const;
};

/// Adam first/second moment state, one entry per raw parameter.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  static AdamState zero(int p) { return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)}; }
};

/// One Adam ascent update (maximization) with bias correction; t is 1-based.
/// raw_params and the moments are updated in place.
void adam_step(Eigen::VectorXd& raw_params, const Eigen::VectorXd& grad, AdamState& state,
               int t, const TrainConfig& config);

/// Per-step training record; params are the values after the step's update.
struct StepRecord {
  int step = 0;  // 1-based
  Eigen::VectorXd raw_params;
  Eigen::VectorXd constrained_params;
  Eigen::VectorXd gradient;
  int solver_iterations = 0;
  double solver_seconds = 0.0;
  double cumulative_seconds = 0.0;
  Eigen::VectorXd per_column_relative_residual;
  double warm_start_distance = 0.0;  // H-norm RMSE between init and solution
  std::uint64_t probe_seed = 0;      // seed the step's probes were drawn from
  Eigen::MatrixXd solver_init;       // only with TrainConfig::record_solver_state
  Eigen::MatrixXd solver_solutions;  // only with TrainConfig::record_solver_state
};

struct OptTrace {
  std::vector<StepRecord> steps;

  const StepRecord& back() const { return steps.back(); }
  Hyperparameters final_hyperparameters(int input_dim) const;
  /// Sum of solver iterations over 1-based steps [first, last] (clamped).
  long total_solver_iterations(int first = 1, int last = 1 << 30) const;
};

/// Iterative marginal-likelihood ascent: per step builds H, solves the
/// batched systems [y, z_1..z_s] with the configured solver (warm or cold
/// initialization), assembles the stochastic gradient, and applies Adam.
OptTrace train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& config);

/// Identical loop with the exact Cholesky gradient substituted; the
/// reference trajectory for comparisons.
OptTrace train_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const TrainConfig& config);

}  // namespace warmgp
