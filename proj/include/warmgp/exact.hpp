#pragma once

#include <Eigen/Dense>

#include "warmgp/kernel.hpp"

namespace warmgp {

/// Gaussian predictive distribution at test inputs. Variances are latent
/// (noise-free); add the noise variance for predictive densities of targets.
struct PredictiveDistribution {
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  double noise_variance = 0.0;
};

struct TestMetrics {
  double rmse = 0.0;
  double mean_loglik = 0.0;
};

/// Largest n for which the dense Cholesky reference path is allowed.
inline constexpr int kDenseGuard = 20000;

/// Log marginal likelihood via Cholesky:
/// -1/2 y^T H^-1 y - sum log L_ii - n/2 log(2 pi).
double exact_mll(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const Hyperparameters& hyper);

/// Exact MLL gradient with respect to every raw hyperparameter,
/// 1/2 a^T dH a - 1/2 tr(H^-1 dH) with a = H^-1 y.
Eigen::VectorXd exact_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Hyperparameters& hyper);

/// Posterior mean and latent variance at X_test (zero prior mean).
PredictiveDistribution predict(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& X_test, const Hyperparameters& hyper);

/// RMSE and mean predictive log-likelihood of observed targets; the
/// predictive variance is the latent variance plus the noise variance.
/// Both metrics live in whatever target space `pred` and `y_test` share
/// (standardized space in the experiment harness).
TestMetrics test_metrics(const PredictiveDistribution& pred, const Eigen::VectorXd& y_test);

}  // namespace warmgp
