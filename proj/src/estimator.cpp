#include "warmgp/estimator.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "warmgp/common.hpp"

namespace warmgp {

const char* to_string(ProbeDistribution d) {
  return d == ProbeDistribution::Gaussian ? "gaussian" : "rademacher";
}

ProbeDistribution probe_distribution_from_string(const std::string& name) {
  if (name == "gaussian") return ProbeDistribution::Gaussian;
  if (name == "rademacher") return ProbeDistribution::Rademacher;
  throw std::invalid_argument("unknown probe distribution: " + name);
}

ProbeSet sample_probes(int n, int s, ProbeDistribution distribution, std::uint64_t seed) {
  if (n < 1 || s < 1) throw std::invalid_argument("sample_probes: n and s must be >= 1");
  ProbeSet set;
  set.distribution = distribution;
  set.seed = seed;
  set.probes.resize(n, s);
  std::mt19937_64 rng(seed);
  if (distribution == ProbeDistribution::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < n; ++i) set.probes(i, j) = normal(rng);
  } else {
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < n; ++i) set.probes(i, j) = (rng() & 1u) ? 1.0 : -1.0;
  }
  return set;
}

GradientEstimate assemble_gradient(const Eigen::VectorXd& v_y,
                                   const Eigen::MatrixXd& probe_solves,
                                   const ProbeSet& probes,
                                   const std::vector<DerivativeMatrix>& derivs) {
  const Eigen::Index n = v_y.size();
  const Eigen::Index s = probes.probes.cols();
  if (probe_solves.rows() != n || probes.probes.rows() != n || probe_solves.cols() != s)
    throw std::invalid_argument("assemble_gradient: shape mismatch");

  const int p = static_cast<int>(derivs.size());
  GradientEstimate est;
  est.quadratic_term.resize(p);
  est.trace_term.resize(p);
  for (int k = 0; k < p; ++k) {
    const Eigen::MatrixXd& D = derivs[k].values;
    if (D.rows() != n || D.cols() != n)
      throw std::invalid_argument("assemble_gradient: derivative matrix shape mismatch");
    est.quadratic_term[k] = 0.5 * v_y.dot(D * v_y);
    const Eigen::MatrixXd DZ = D * probes.probes;
    est.trace_term[k] = 0.5 / static_cast<double>(s) * probe_solves.cwiseProduct(DZ).sum();
  }
  return est;
}

GradientEstimate assemble_gradient_streamed(const Eigen::VectorXd& v_y,
                                            const Eigen::MatrixXd& probe_solves,
                                            const ProbeSet& probes,
                                            const Eigen::MatrixXd& X,
                                            const Hyperparameters& hyper,
                                            const KernelMatrices& parts) {
  const Eigen::Index n = v_y.size();
  const Eigen::Index s = probes.probes.cols();
  if (probe_solves.rows() != n || probes.probes.rows() != n || probe_solves.cols() != s)
    throw std::invalid_argument("assemble_gradient_streamed: shape mismatch");

  // Both terms are Frobenius contractions <dH_k, G>: the quadratic term with
  // G = 1/2 v_y v_y^T, the trace term with G = 1/(2s) V Z^T.
  const Eigen::MatrixXd A = 0.5 * (v_y * v_y.transpose());
  const Eigen::MatrixXd B =
      (0.5 / static_cast<double>(s)) * (probe_solves * probes.probes.transpose());
  GradientEstimate est;
  derivative_contractions(X, hyper, parts, A, B, est.quadratic_term, est.trace_term);
  return est;
}

double warm_start_distance(const SolveState& prev, const Eigen::MatrixXd& current_solution,
                           const Eigen::MatrixXd& H) {
  if (prev.solutions.rows() != current_solution.rows() ||
      prev.solutions.cols() != current_solution.cols())
    throw std::invalid_argument("warm_start_distance: shape mismatch");
  const Eigen::MatrixXd D = prev.solutions - current_solution;
  const Eigen::MatrixXd HD = H * D;
  const double n = static_cast<double>(H.rows());
  const double mean_quadratic =
      D.cwiseProduct(HD).colwise().sum().mean() / n;
  return std::sqrt(std::max(mean_quadratic, 0.0));
}

}  // namespace warmgp
