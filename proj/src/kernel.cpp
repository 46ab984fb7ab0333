#include "warmgp/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "warmgp/common.hpp"

namespace warmgp {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
}

double softplus(double x) {
  // log(1 + e^x); for large x the direct form overflows.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double softplus_inverse(double v) {
  if (!(v > 0.0)) throw std::invalid_argument("softplus_inverse: argument must be positive");
  // log(e^v - 1); two branches to stay accurate for tiny and large v.
  if (v > 0.6931471805599453) return v + std::log1p(-std::exp(-v));
  return std::log(std::expm1(v));
}

double softplus_derivative(double x) {
  if (x > 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Hyperparameters::Hyperparameters(Eigen::VectorXd raw_lengthscales, double raw_signal,
                                 double raw_noise)
    : raw_lengthscales_(std::move(raw_lengthscales)),
      raw_signal_(raw_signal),
      raw_noise_(raw_noise) {}

Hyperparameters Hyperparameters::from_constrained(const Eigen::VectorXd& lengthscales,
                                                  double signal_scale, double noise_scale) {
  Eigen::VectorXd raw(lengthscales.size());
  for (Eigen::Index k = 0; k < lengthscales.size(); ++k) raw[k] = softplus_inverse(lengthscales[k]);
  return Hyperparameters(std::move(raw), softplus_inverse(signal_scale),
                         softplus_inverse(noise_scale));
}

Hyperparameters Hyperparameters::constant_constrained(int input_dim, double value) {
  return from_constrained(Eigen::VectorXd::Constant(input_dim, value), value, value);
}

Hyperparameters Hyperparameters::from_raw_vector(int input_dim, const Eigen::VectorXd& raw) {
  if (raw.size() != input_dim + 2)
    throw std::invalid_argument("Hyperparameters: raw vector must have input_dim + 2 entries");
  return Hyperparameters(raw.head(input_dim), raw[input_dim], raw[input_dim + 1]);
}

Eigen::VectorXd Hyperparameters::lengthscales() const {
  Eigen::VectorXd out(raw_lengthscales_.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = softplus(raw_lengthscales_[k]);
  return out;
}

Eigen::VectorXd Hyperparameters::to_raw_vector() const {
  Eigen::VectorXd out(num_params());
  out.head(input_dim()) = raw_lengthscales_;
  out[input_dim()] = raw_signal_;
  out[input_dim() + 1] = raw_noise_;
  return out;
}

Eigen::VectorXd Hyperparameters::to_constrained_vector() const {
  Eigen::VectorXd out(num_params());
  out.head(input_dim()) = lengthscales();
  out[input_dim()] = signal_scale();
  out[input_dim() + 1] = noise_scale();
  return out;
}

double matern32(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                const Hyperparameters& hyper) {
  if (x.size() != x2.size() || x.size() != hyper.input_dim())
    throw std::invalid_argument("matern32: input dimension mismatch");
  if (!x.allFinite() || !x2.allFinite())
    throw std::invalid_argument("matern32: non-finite input");
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double u = (x[k] - x2[k]) / hyper.lengthscale(static_cast<int>(k));
    r2 += u * u;
  }
  const double r = std::sqrt(r2);
  const double sf = hyper.signal_scale();
  return sf * sf * (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
}

namespace {

// Pairwise scaled squared distances via the Gram trick; tiny negative values
// from cancellation are clamped so duplicate rows give exactly zero. The
// assembly stays exactly symmetric: G is mirrored from its lower triangle
// and sq_i + sq_j is commutative.
Eigen::MatrixXd scaled_sqdist(const Eigen::MatrixXd& X, const Eigen::VectorXd& lengthscales) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd Xs = X * lengthscales.cwiseInverse().asDiagonal();
  Eigen::VectorXd sq = Xs.rowwise().squaredNorm();
  Eigen::MatrixXd G(n, n);
  G.setZero();
  G.selfadjointView<Eigen::Lower>().rankUpdate(Xs);
  const Eigen::MatrixXd G_full = G.selfadjointView<Eigen::Lower>();
  // sq_i + sq_j first (commutative, hence exactly symmetric), then one
  // subtraction of the symmetric Gram matrix.
  Eigen::MatrixXd D(n, n);
  D.colwise() = sq;
  D.rowwise() += sq.transpose();
  D -= 2.0 * G_full;
  return D.cwiseMax(0.0);
}

}  // namespace

KernelMatrices build_kernel_matrices(const Eigen::MatrixXd& X, const Hyperparameters& hyper) {
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::invalid_argument("build_kernel_matrices: need at least one row");
  if (X.cols() != hyper.input_dim())
    throw std::invalid_argument("build_kernel_matrices: input dimension mismatch");
  if (!X.allFinite()) throw std::invalid_argument("build_kernel_matrices: non-finite input");

  const double sf = hyper.signal_scale();
  const double sf2 = sf * sf;
  const double noise2 = hyper.noise_scale() * hyper.noise_scale();

  KernelMatrices parts;
  Eigen::MatrixXd R = scaled_sqdist(X, hyper.lengthscales());
  R = R.array().sqrt().matrix();  // scaled distances
  parts.decay = (-kSqrt3 * R.array()).exp().matrix();
  parts.kernel = sf2 * (1.0 + kSqrt3 * R.array()) * parts.decay.array();
  parts.system = parts.kernel;
  parts.system.diagonal().array() += noise2;
  return parts;
}

SystemMatrix system_matrix(const Eigen::MatrixXd& X, const Hyperparameters& hyper) {
  return build_kernel_matrices(X, hyper).system;
}

Eigen::MatrixXd cross_matrix(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2,
                             const Hyperparameters& hyper) {
  if (X1.cols() != hyper.input_dim() || X2.cols() != hyper.input_dim())
    throw std::invalid_argument("cross_matrix: input dimension mismatch");
  const Eigen::VectorXd inv_ls = hyper.lengthscales().cwiseInverse();
  const Eigen::MatrixXd A = X1 * inv_ls.asDiagonal();
  const Eigen::MatrixXd B = X2 * inv_ls.asDiagonal();
  const Eigen::VectorXd sa = A.rowwise().squaredNorm();
  const Eigen::VectorXd sb = B.rowwise().squaredNorm();
  Eigen::MatrixXd D = sa.replicate(1, B.rows()) + sb.transpose().replicate(A.rows(), 1) - 2.0 * A * B.transpose();
  D = D.cwiseMax(0.0).array().sqrt().matrix();
  const double sf2 = hyper.signal_scale() * hyper.signal_scale();
  return (sf2 * (1.0 + kSqrt3 * D.array()) * (-kSqrt3 * D.array()).exp()).matrix();
}

DerivativeMatrix derivative_matrix(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                                   int parameter_index, const KernelMatrices& parts) {
  const int d = hyper.input_dim();
  const Eigen::Index n = X.rows();
  if (parameter_index < 0 || parameter_index >= hyper.num_params())
    throw std::invalid_argument("derivative_matrix: parameter index out of range");

  DerivativeMatrix out;
  out.parameter_index = parameter_index;
  const double sf = hyper.signal_scale();

  if (parameter_index < d) {
    // dk/dl_k = 3 s_f^2 exp(-sqrt(3) r) (x_k - x2_k)^2 / l_k^3; the analytic
    // limit at r = 0 is 0 and the formula hits it without a 0/0.
    const double ls = hyper.lengthscale(parameter_index);
    const double chain = softplus_derivative(hyper.raw_lengthscales()[parameter_index]);
    const double scale = 3.0 * sf * sf * chain / (ls * ls * ls);
    out.values.resize(n, n);
    const Eigen::VectorXd col = X.col(parameter_index);
    for (Eigen::Index j = 0; j < n; ++j) {
      out.values(j, j) = 0.0;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double diff = col[i] - col[j];
        const double v = scale * parts.decay(i, j) * diff * diff;
        out.values(i, j) = v;
        out.values(j, i) = v;
      }
    }
  } else if (parameter_index == d) {
    // dK/ds_f = 2 K / s_f.
    const double chain = softplus_derivative(hyper.raw_signal());
    out.values = (2.0 * chain / sf) * parts.kernel;
  } else {
    // dH/dsigma = 2 sigma I.
    const double chain = softplus_derivative(hyper.raw_noise());
    out.values = Eigen::MatrixXd::Zero(n, n);
    out.values.diagonal().setConstant(2.0 * hyper.noise_scale() * chain);
  }
  return out;
}

DerivativeMatrix derivative_matrix(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                                   int parameter_index) {
  return derivative_matrix(X, hyper, parameter_index, build_kernel_matrices(X, hyper));
}

std::vector<DerivativeMatrix> derivative_matrices(const Eigen::MatrixXd& X,
                                                  const Hyperparameters& hyper) {
  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  std::vector<DerivativeMatrix> out;
  out.reserve(hyper.num_params());
  for (int k = 0; k < hyper.num_params(); ++k)
    out.push_back(derivative_matrix(X, hyper, k, parts));
  return out;
}

void derivative_contractions(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                             const KernelMatrices& parts, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& B, Eigen::VectorXd& out_a,
                             Eigen::VectorXd& out_b) {
  const int d = hyper.input_dim();
  const Eigen::Index n = X.rows();
  const int p = hyper.num_params();
  out_a.resize(p);
  out_b.resize(p);

  const double sf = hyper.signal_scale();
  // <D_k, A> for lengthscale k is sum_ij decay_ij (x_ik - x_jk)^2 A_ij.
  // Expanding the square turns the whole family into two n^2 d products:
  // sum_ij P_ij (x_i^2 + x_j^2) - 2 x^T P x with P = decay .* A.
  const Eigen::MatrixXd P = parts.decay.cwiseProduct(A);
  const Eigen::MatrixXd Q = parts.decay.cwiseProduct(B);
  const Eigen::VectorXd p_sums = P.rowwise().sum() + P.colwise().sum().transpose();
  const Eigen::VectorXd q_sums = Q.rowwise().sum() + Q.colwise().sum().transpose();
  const Eigen::MatrixXd PX = P * X;
  const Eigen::MatrixXd QX = Q * X;
  const Eigen::MatrixXd X2 = X.cwiseProduct(X);
  for (int k = 0; k < d; ++k) {
    const double ls = hyper.lengthscale(k);
    const double chain = softplus_derivative(hyper.raw_lengthscales()[k]);
    const double scale = 3.0 * sf * sf * chain / (ls * ls * ls);
    out_a[k] = scale * (X2.col(k).dot(p_sums) - 2.0 * X.col(k).dot(PX.col(k)));
    out_b[k] = scale * (X2.col(k).dot(q_sums) - 2.0 * X.col(k).dot(QX.col(k)));
  }

  const double chain_sf = softplus_derivative(hyper.raw_signal());
  out_a[d] = (2.0 * chain_sf / sf) * parts.kernel.cwiseProduct(A).sum();
  out_b[d] = (2.0 * chain_sf / sf) * parts.kernel.cwiseProduct(B).sum();

  const double dnoise = 2.0 * hyper.noise_scale() * softplus_derivative(hyper.raw_noise());
  out_a[d + 1] = dnoise * A.trace();
  out_b[d + 1] = dnoise * B.trace();
}

}  // namespace warmgp
