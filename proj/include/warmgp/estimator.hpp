#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "warmgp/kernel.hpp"
#include "warmgp/solvers.hpp"

namespace warmgp {

enum class ProbeDistribution { Gaussian, Rademacher };

const char* to_string(ProbeDistribution d);
ProbeDistribution probe_distribution_from_string(const std::string& name);

/// Probe vectors z_1..z_s (columns) for stochastic trace estimation;
/// E[z z^T] = I for both supported distributions.
struct ProbeSet {
  Eigen::MatrixXd probes;  // n x s
  ProbeDistribution distribution = ProbeDistribution::Gaussian;
  std::uint64_t seed = 0;
  bool fixed = true;  // reused across optimizer steps vs resampled per step

  /// E[z^4] of a single coordinate: 3 for Gaussian, 1 for Rademacher.
  double fourth_moment() const {
    return distribution == ProbeDistribution::Gaussian ? 3.0 : 1.0;
  }
};

ProbeSet sample_probes(int n, int s, ProbeDistribution distribution, std::uint64_t seed);

/// Approximate MLL gradient split into its two terms; gradient() is exactly
/// quadratic_term - trace_term.
struct GradientEstimate {
  Eigen::VectorXd quadratic_term;  // 1/2 v_y^T dH v_y per raw parameter
  Eigen::VectorXd trace_term;      // 1/2 1/s sum_j v_j^T dH z_j per raw parameter

  Eigen::VectorXd gradient() const { return quadratic_term - trace_term; }
};

/// Assembles the stochastic gradient from solver outputs and explicit
/// derivative matrices: each term is a (dH z) matrix-vector product dotted
/// with the corresponding solve.
GradientEstimate assemble_gradient(const Eigen::VectorXd& v_y,
                                   const Eigen::MatrixXd& probe_solves,
                                   const ProbeSet& probes,
                                   const std::vector<DerivativeMatrix>& derivs);

/// Same estimate computed by streaming kernel-structure contractions instead
/// of materializing every derivative matrix; keeps memory flat in the input
/// dimension. Agrees with the explicit route to floating-point reordering.
GradientEstimate assemble_gradient_streamed(const Eigen::VectorXd& v_y,
                                            const Eigen::MatrixXd& probe_solves,
                                            const ProbeSet& probes,
                                            const Eigen::MatrixXd& X,
                                            const Hyperparameters& hyper,
                                            const KernelMatrices& parts);

/// Diagnostic distance between a solver initialization and the solution in
/// the norm induced by H: sqrt(mean over columns of (x0-x*)^T H (x0-x*) / n).
double warm_start_distance(const SolveState& prev, const Eigen::MatrixXd& current_solution,
                           const Eigen::MatrixXd& H);

}  // namespace warmgp
