#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "warmgp/estimator.hpp"
#include "warmgp/kernel.hpp"

namespace warmgp {

/// Monte Carlo check of the identity
/// E || ((1/s) sum_p z_p z_p^T - I) c ||^2 = (E[z^4] + n - 2) / s
/// for a fixed random unit vector c.
struct BoundReport {
  int n = 0;
  int s = 0;
  ProbeDistribution distribution = ProbeDistribution::Gaussian;
  int trials = 0;
  double empirical_mean = 0.0;
  double theoretical_value = 0.0;
  double standard_error = 0.0;  // 0 only for the degenerate constant cells
  double z_score = 0.0;
};

BoundReport check_lemma_a2(int n, int s, ProbeDistribution distribution, int trials,
                           std::uint64_t seed);

/// Spectral quantities entering the gradient-error bound: the eigenvalue
/// bounds of H^-1 and dH/dtheta_k, their product, and the exact spectral
/// norm of H^-1 dH for comparison (always <= the product).
struct SpectralBound {
  double lambda_h_inv = 0.0;
  double lambda_dh = 0.0;
  double bound = 0.0;          // lambda_h_inv * lambda_dh
  double product_norm = 0.0;   // sigma_max(H^-1 dH)
};

SpectralBound lambda_max(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                         int parameter_index);

/// |g~_k - g_k| statistics across probe redraws with exact solves, per probe
/// count s. Quantiles pool all coordinates and trials; mean_estimate and
/// standard_error are per-coordinate across trials (for unbiasedness checks).
struct GradientErrorRow {
  int s = 0;
  int trials = 0;
  double q50 = 0.0;
  double q90 = 0.0;
  double max_error = 0.0;
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd standard_error;
};

struct GradientErrorTable {
  Eigen::VectorXd exact;  // reference gradient
  std::vector<GradientErrorRow> rows;

  /// Least-squares slope of log(q90) against log(s); Monte Carlo rate is -1/2.
  double q90_loglog_slope() const;
};

GradientErrorTable gradient_error_histogram(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Hyperparameters& hyper,
                                            const std::vector<int>& s_values, int trials,
                                            std::uint64_t seed);

}  // namespace warmgp
