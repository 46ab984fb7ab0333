#pragma once

#include <Eigen/Dense>
#include <vector>

namespace warmgp {

/// softplus(x) = log(1 + exp(x)), evaluated without overflow.
double softplus(double x);
/// Inverse of softplus; stable for arguments in [1e-6, 1e6].
double softplus_inverse(double v);
/// d softplus / dx = logistic sigmoid.
double softplus_derivative(double x);

/// Kernel and likelihood hyperparameters stored as unconstrained reals.
/// Constrained values (lengthscales, signal scale, noise scale) are obtained
/// through softplus, so any real raw vector is valid and optimizers can work
/// in raw space. Raw packing order: [lengthscales..., signal, noise].
class Hyperparameters {
 public:
  Hyperparameters() = default;
  Hyperparameters(Eigen::VectorXd raw_lengthscales, double raw_signal, double raw_noise);

  static Hyperparameters from_constrained(const Eigen::VectorXd& lengthscales,
                                          double signal_scale, double noise_scale);
  /// All constrained values set to `value` (paper-style init is 1.0).
  static Hyperparameters constant_constrained(int input_dim, double value);
  static Hyperparameters from_raw_vector(int input_dim, const Eigen::VectorXd& raw);

  int input_dim() const { return static_cast<int>(raw_lengthscales_.size()); }
  /// Number of raw parameters, input_dim() + 2.
  int num_params() const { return input_dim() + 2; }

  const Eigen::VectorXd& raw_lengthscales() const { return raw_lengthscales_; }
  double raw_signal() const { return raw_signal_; }
  double raw_noise() const { return raw_noise_; }

  double lengthscale(int k) const { return softplus(raw_lengthscales_[k]); }
  Eigen::VectorXd lengthscales() const;
  double signal_scale() const { return softplus(raw_signal_); }
  double noise_scale() const { return softplus(raw_noise_); }

  Eigen::VectorXd to_raw_vector() const;
  Eigen::VectorXd to_constrained_vector() const;

 private:
  Eigen::VectorXd raw_lengthscales_;
  double raw_signal_ = 0.0;
  double raw_noise_ = 0.0;
};

/// Dense symmetric system matrix H = K + sigma^2 I.
using SystemMatrix = Eigen::MatrixXd;

/// dH/d(raw parameter k), a dense symmetric n x n matrix.
struct DerivativeMatrix {
  Eigen::MatrixXd values;
  int parameter_index = -1;
};

/// Matrices shared between H and its derivatives, built once per
/// hyperparameter setting: K (no noise), the exponential decay factor
/// exp(-sqrt(3) r_ij), and H itself.
struct KernelMatrices {
  Eigen::MatrixXd system;  // K + sigma^2 I
  Eigen::MatrixXd kernel;  // K
  Eigen::MatrixXd decay;   // exp(-sqrt(3) r_ij)
};

/// Matern-3/2 ARD kernel value for a single pair of points,
/// s_f^2 (1 + sqrt(3) r) exp(-sqrt(3) r) with r the lengthscale-scaled
/// Euclidean distance. The signal scale enters squared (variance prefactor).
double matern32(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                const Hyperparameters& hyper);

/// H = K + sigma^2 I for the rows of X. Exactly symmetric by construction.
SystemMatrix system_matrix(const Eigen::MatrixXd& X, const Hyperparameters& hyper);

/// H plus the reusable pieces needed for derivative assembly.
KernelMatrices build_kernel_matrices(const Eigen::MatrixXd& X, const Hyperparameters& hyper);

/// Cross-kernel matrix k(X1, X2), no noise term (used for prediction).
Eigen::MatrixXd cross_matrix(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                             const Hyperparameters& hyper);

/// dH/d(raw parameter k); chain rule through softplus is applied here.
DerivativeMatrix derivative_matrix(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                                   int parameter_index, const KernelMatrices& parts);
DerivativeMatrix derivative_matrix(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                                   int parameter_index);

/// All raw-parameter derivative matrices, ordered [lengthscales..., signal, noise].
std::vector<DerivativeMatrix> derivative_matrices(const Eigen::MatrixXd& X,
                                                  const Hyperparameters& hyper);

/// Frobenius inner products <dH/dtheta_k, A> and <dH/dtheta_k, B> for every
/// raw parameter k, streamed without materializing the derivative matrices.
/// Gradient assembly and the exact trace path are both contractions of this
/// form, which keeps memory at O(n^2) for any input dimension.
void derivative_contractions(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                             const KernelMatrices& parts, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& B, Eigen::VectorXd& out_a,
                             Eigen::VectorXd& out_b);

}  // namespace warmgp
