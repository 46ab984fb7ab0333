#include "warmgp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "warmgp/common.hpp"
#include "warmgp/exact.hpp"

namespace warmgp {

BoundReport check_lemma_a2(int n, int s, ProbeDistribution distribution, int trials,
                           std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("check_lemma_a2: need at least 100 trials");
  if (n < 1 || s < 1) throw std::invalid_argument("check_lemma_a2: n and s must be >= 1");

  BoundReport report;
  report.n = n;
  report.s = s;
  report.distribution = distribution;
  report.trials = trials;
  const double m4 = distribution == ProbeDistribution::Gaussian ? 3.0 : 1.0;
  report.theoretical_value = (m4 + static_cast<double>(n) - 2.0) / static_cast<double>(s);

  // Unit vector drawn uniformly on the sphere (the identity holds for any c).
  std::mt19937_64 rng(derive_seed(seed, 0xc0ffee));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd c(n);
  do {
    for (int i = 0; i < n; ++i) c[i] = normal(rng);
  } while (c.norm() == 0.0);
  c.normalize();

  double sum = 0.0, sum_sq = 0.0;
  const double inv_s = 1.0 / static_cast<double>(s);
  for (int trial = 0; trial < trials; ++trial) {
    const ProbeSet set =
        sample_probes(n, s, distribution, derive_seed(seed, static_cast<std::uint64_t>(trial)));
    const Eigen::VectorXd w = set.probes.transpose() * c;
    const Eigen::VectorXd m_c = inv_s * (set.probes * w) - c;
    const double value = m_c.squaredNorm();
    sum += value;
    sum_sq += value * value;
  }
  report.empirical_mean = sum / trials;
  const double var = std::max(0.0, (sum_sq - sum * sum / trials) / (trials - 1));
  report.standard_error = std::sqrt(var / trials);
  report.z_score = report.standard_error > 0.0
                       ? (report.empirical_mean - report.theoretical_value) / report.standard_error
                       : 0.0;
  return report;
}

SpectralBound lambda_max(const Eigen::MatrixXd& X, const Hyperparameters& hyper,
                         int parameter_index) {
  const Eigen::Index n = X.rows();
  if (n > 2000) throw std::invalid_argument("lambda_max: n exceeds the dense eigensolver guard");
  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  const DerivativeMatrix deriv = derivative_matrix(X, hyper, parameter_index, parts);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_h(parts.system, Eigen::EigenvaluesOnly);
  const double lambda_min_h = eig_h.eigenvalues().minCoeff();
  if (!(lambda_min_h > 0.0)) throw NumericalError("lambda_max: H is not positive definite");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_d(deriv.values, Eigen::EigenvaluesOnly);

  SpectralBound out;
  out.lambda_h_inv = 1.0 / lambda_min_h;
  out.lambda_dh = eig_d.eigenvalues().cwiseAbs().maxCoeff();
  out.bound = out.lambda_h_inv * out.lambda_dh;

  const Eigen::LLT<Eigen::MatrixXd> llt(parts.system);
  const Eigen::MatrixXd product = llt.solve(deriv.values);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(product);
  out.product_norm = svd.singularValues()(0);
  return out;
}

double GradientErrorTable::q90_loglog_slope() const {
  if (rows.size() < 2) throw std::logic_error("q90_loglog_slope: need at least two rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double len = static_cast<double>(rows.size());
  for (const GradientErrorRow& row : rows) {
    const double x = std::log(static_cast<double>(row.s));
    const double y = std::log(row.q90);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (len * sxy - sx * sy) / (len * sxx - sx * sx);
}

namespace {

double nearest_rank_quantile(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(values.size())));
  return values[std::min(values.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
}

}  // namespace

GradientErrorTable gradient_error_histogram(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Hyperparameters& hyper,
                                            const std::vector<int>& s_values, int trials,
                                            std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (n > 500) throw std::invalid_argument("gradient_error_histogram: n exceeds the exact-gradient guard");
  if (trials < 2) throw std::invalid_argument("gradient_error_histogram: need at least 2 trials");

  GradientErrorTable table;
  table.exact = exact_gradient(X, y, hyper);
  const int p = static_cast<int>(table.exact.size());

  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  const Eigen::LLT<Eigen::MatrixXd> llt(parts.system);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gradient_error_histogram: H is not positive definite");
  const Eigen::VectorXd v_y = llt.solve(y);

  for (std::size_t si = 0; si < s_values.size(); ++si) {
    const int s = s_values[si];
    GradientErrorRow row;
    row.s = s;
    row.trials = trials;
    Eigen::MatrixXd estimates(p, trials);
    std::vector<double> abs_errors;
    abs_errors.reserve(static_cast<std::size_t>(p) * trials);
    for (int trial = 0; trial < trials; ++trial) {
      const ProbeSet probes = sample_probes(
          static_cast<int>(n), s, ProbeDistribution::Gaussian,
          derive_seed(seed, (static_cast<std::uint64_t>(si) << 32) | static_cast<std::uint64_t>(trial)));
      const Eigen::MatrixXd solves = llt.solve(probes.probes);
      const GradientEstimate est =
          assemble_gradient_streamed(v_y, solves, probes, X, hyper, parts);
      estimates.col(trial) = est.gradient();
      for (int k = 0; k < p; ++k)
        abs_errors.push_back(std::abs(estimates(k, trial) - table.exact[k]));
    }
    row.q50 = nearest_rank_quantile(abs_errors, 0.5);
    row.q90 = nearest_rank_quantile(abs_errors, 0.9);
    row.max_error = *std::max_element(abs_errors.begin(), abs_errors.end());
    row.mean_estimate = estimates.rowwise().mean();
    Eigen::VectorXd variance(p);
    for (int k = 0; k < p; ++k) {
      const Eigen::ArrayXd centered = estimates.row(k).array() - row.mean_estimate[k];
      variance[k] = centered.square().sum() / (trials - 1);
    }
    row.standard_error = (variance / static_cast<double>(trials)).cwiseSqrt();
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace warmgp
