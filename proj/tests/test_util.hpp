#pragma once

#include <Eigen/Dense>
#include <random>

#include "warmgp/kernel.hpp"

namespace warmgp::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  return random_matrix(n, 1, rng);
}

/// SPD matrix with eigenvalues uniform in [lo, hi].
inline Eigen::MatrixXd random_spd(Eigen::Index n, double lo, double hi, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = random_matrix(n, n, rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  std::uniform_real_distribution<double> uni(lo, hi);
  Eigen::VectorXd eigs(n);
  for (Eigen::Index i = 0; i < n; ++i) eigs[i] = uni(rng);
  Eigen::MatrixXd h = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (h + h.transpose());
}

inline Eigen::MatrixXd random_inputs(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = uni(rng);
  return x;
}

inline double rel_error(double value, double reference) {
  const double denom = std::max(std::abs(reference), 1e-300);
  return std::abs(value - reference) / denom;
}

inline double rel_frobenius(const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference) {
  return (value - reference).norm() / std::max(reference.norm(), 1e-300);
}

}  // namespace warmgp::testing
