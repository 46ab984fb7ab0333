#include "warmgp/exact.hpp"

#include <cmath>
#include <stdexcept>

#include "warmgp/common.hpp"

namespace warmgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& H, const char* who) {
  if (H.rows() > kDenseGuard)
    throw std::invalid_argument(std::string(who) + ": n exceeds the dense guard");
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(who) + ": system matrix is not positive definite");
  return llt;
}

}  // namespace

double exact_mll(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const Hyperparameters& hyper) {
  const Eigen::Index n = X.rows();
  if (y.size() != n) throw std::invalid_argument("exact_mll: X and y disagree on n");
  const Eigen::MatrixXd H = system_matrix(X, hyper);
  const auto llt = factorize(H, "exact_mll");
  const Eigen::VectorXd alpha = llt.solve(y);
  const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - log_det_half - 0.5 * static_cast<double>(n) * kLog2Pi;
}

Eigen::VectorXd exact_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Hyperparameters& hyper) {
  const Eigen::Index n = X.rows();
  if (y.size() != n) throw std::invalid_argument("exact_gradient: X and y disagree on n");
  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  const auto llt = factorize(parts.system, "exact_gradient");
  const Eigen::VectorXd alpha = llt.solve(y);
  const Eigen::MatrixXd H_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  // g_k = <dH_k, 1/2 alpha alpha^T> - <dH_k, 1/2 H^-1>, streamed per k.
  Eigen::VectorXd quad, trace;
  derivative_contractions(X, hyper, parts, 0.5 * (alpha * alpha.transpose()), 0.5 * H_inv,
                          quad, trace);
  return quad - trace;
}

PredictiveDistribution predict(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& X_test, const Hyperparameters& hyper) {
  const Eigen::Index n = X_train.rows();
  if (y.size() != n) throw std::invalid_argument("predict: X_train and y disagree on n");

  PredictiveDistribution out;
  const double sf2 = hyper.signal_scale() * hyper.signal_scale();
  out.noise_variance = hyper.noise_scale() * hyper.noise_scale();
  if (X_test.rows() == 0) {
    out.means.resize(0);
    out.variances.resize(0);
    return out;
  }

  const Eigen::MatrixXd H = system_matrix(X_train, hyper);
  const auto llt = factorize(H, "predict");
  const Eigen::VectorXd alpha = llt.solve(y);
  const Eigen::MatrixXd K_star = cross_matrix(X_train, X_test, hyper);  // n x m
  out.means = K_star.transpose() * alpha;

  const Eigen::MatrixXd W = llt.solve(K_star);
  out.variances = (sf2 - (K_star.cwiseProduct(W)).colwise().sum().array()).matrix();
  for (Eigen::Index i = 0; i < out.variances.size(); ++i) {
    if (out.variances[i] < -1e-10)
      throw NumericalError("predict: negative predictive variance beyond tolerance");
    if (out.variances[i] < 0.0) out.variances[i] = 0.0;
  }
  return out;
}

TestMetrics test_metrics(const PredictiveDistribution& pred, const Eigen::VectorXd& y_test) {
  if (pred.means.size() != y_test.size())
    throw std::invalid_argument("test_metrics: prediction/target length mismatch");
  TestMetrics m;
  if (y_test.size() == 0) return m;
  const Eigen::ArrayXd err = (pred.means - y_test).array();
  m.rmse = std::sqrt(err.square().mean());
  const Eigen::ArrayXd var = pred.variances.array() + pred.noise_variance;
  m.mean_loglik = (-0.5 * (var.log() + kLog2Pi) - 0.5 * err.square() / var).mean();
  return m;
}

}  // namespace warmgp
