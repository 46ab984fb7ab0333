#include <doctest.h>

#include <cmath>
#include <random>

#include "warmgp/estimator.hpp"
#include "warmgp/exact.hpp"
#include "test_util.hpp"

using namespace warmgp;
using namespace warmgp::testing;

TEST_SUITE("estimator") {

TEST_CASE("probe sampling is deterministic given the seed") {
  const ProbeSet a = sample_probes(64, 8, ProbeDistribution::Gaussian, 42);
  const ProbeSet b = sample_probes(64, 8, ProbeDistribution::Gaussian, 42);
  CHECK((a.probes.array() == b.probes.array()).all());
  const ProbeSet c = sample_probes(64, 8, ProbeDistribution::Gaussian, 43);
  CHECK_FALSE((a.probes.array() == c.probes.array()).all());
}

TEST_CASE("rademacher probes are signs") {
  const ProbeSet set = sample_probes(50, 6, ProbeDistribution::Rademacher, 7);
  CHECK((set.probes.array().square() == 1.0).all());
  CHECK(set.fourth_moment() == 1.0);
  CHECK(sample_probes(2, 2, ProbeDistribution::Gaussian, 7).fourth_moment() == 3.0);
}

TEST_CASE("gaussian probe entries have unit variance") {
  const ProbeSet set = sample_probes(10000, 1, ProbeDistribution::Gaussian, 11);
  const double var = set.probes.col(0).squaredNorm() / 10000.0;
  CHECK(var >= 0.94);
  CHECK(var <= 1.06);
}

TEST_CASE("probe moments match the identity second-moment contract") {
  const int n = 400, s = 16;
  for (auto dist : {ProbeDistribution::Gaussian, ProbeDistribution::Rademacher}) {
    const ProbeSet set = sample_probes(n, s, dist, 3);
    for (int j = 0; j < s; ++j)
      CHECK(std::abs(set.probes.col(j).mean()) <= 5.0 / std::sqrt(static_cast<double>(n)));
    // Mean diagonal entry of (1/s) sum z z^T.
    const double diag_mean = set.probes.array().square().sum() / (n * s);
    CHECK(std::abs(diag_mean - 1.0) <= 5.0 / std::sqrt(static_cast<double>(s)));
  }
}

TEST_CASE("identity reduction of the assembled gradient") {
  std::mt19937_64 rng(19);
  const int n = 30, s = 5;
  const ProbeSet probes = sample_probes(n, s, ProbeDistribution::Gaussian, 23);
  const Eigen::VectorXd y = random_vector(n, rng);
  // H = I and dH = I: exact solves are the right-hand sides themselves.
  std::vector<DerivativeMatrix> derivs(1);
  derivs[0].values = Eigen::MatrixXd::Identity(n, n);
  derivs[0].parameter_index = 0;
  const GradientEstimate est = assemble_gradient(y, probes.probes, probes, derivs);
  CHECK(est.quadratic_term[0] == doctest::Approx(0.5 * y.squaredNorm()).epsilon(1e-14));
  const double trace_expected = 0.5 / s * probes.probes.squaredNorm();
  CHECK(est.trace_term[0] == doctest::Approx(trace_expected).epsilon(1e-14));
  CHECK(est.gradient()[0] == est.quadratic_term[0] - est.trace_term[0]);  // exact identity
}

TEST_CASE("scaled basis probes recover the exact trace") {
  std::mt19937_64 rng(29);
  const int n = 40;
  const Eigen::MatrixXd X = random_inputs(n, 2, rng);
  const auto hyper = Hyperparameters::from_constrained(
      (Eigen::VectorXd(2) << 0.9, 1.3).finished(), 1.1, 0.3);
  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  const Eigen::MatrixXd H_inv = parts.system.inverse();

  // z_j = sqrt(n) e_j is a valid E[z z^T] = I design with s = n probes.
  ProbeSet probes;
  probes.distribution = ProbeDistribution::Rademacher;  // tag irrelevant here
  probes.probes = std::sqrt(static_cast<double>(n)) * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd solves = H_inv * probes.probes;
  const Eigen::VectorXd v_y = H_inv * random_vector(n, rng);

  const auto derivs = derivative_matrices(X, hyper);
  const GradientEstimate est = assemble_gradient(v_y, solves, probes, derivs);
  const GradientEstimate streamed =
      assemble_gradient_streamed(v_y, solves, probes, X, hyper, parts);
  for (int k = 0; k < hyper.num_params(); ++k) {
    const double exact_trace = 0.5 * (H_inv * derivs[k].values).trace();
    CHECK(std::abs(est.trace_term[k] - exact_trace) <= 1e-10 * std::max(1.0, std::abs(exact_trace)));
    CHECK(std::abs(streamed.trace_term[k] - exact_trace) <=
          1e-10 * std::max(1.0, std::abs(exact_trace)));
  }
}

TEST_CASE("streamed assembly agrees with the explicit-matrix route") {
  std::mt19937_64 rng(37);
  const int n = 50, s = 7;
  const Eigen::MatrixXd X = random_inputs(n, 3, rng);
  const auto hyper = Hyperparameters::from_constrained(
      (Eigen::VectorXd(3) << 0.6, 1.0, 1.7).finished(), 1.2, 0.25);
  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  const ProbeSet probes = sample_probes(n, s, ProbeDistribution::Gaussian, 91);
  const Eigen::LLT<Eigen::MatrixXd> llt(parts.system);
  const Eigen::VectorXd y = random_vector(n, rng);
  const Eigen::VectorXd v_y = llt.solve(y);
  const Eigen::MatrixXd solves = llt.solve(probes.probes);

  const GradientEstimate a = assemble_gradient(v_y, solves, probes, derivative_matrices(X, hyper));
  const GradientEstimate b = assemble_gradient_streamed(v_y, solves, probes, X, hyper, parts);
  for (int k = 0; k < hyper.num_params(); ++k) {
    CHECK(rel_error(b.quadratic_term[k], a.quadratic_term[k]) <= 1e-10);
    CHECK(rel_error(b.trace_term[k], a.trace_term[k]) <= 1e-10);
  }
}

TEST_CASE("assembly is deterministic") {
  std::mt19937_64 rng(53);
  const int n = 25, s = 4;
  const Eigen::MatrixXd X = random_inputs(n, 2, rng);
  const auto hyper = Hyperparameters::constant_constrained(2, 1.0);
  const ProbeSet probes = sample_probes(n, s, ProbeDistribution::Gaussian, 5);
  const Eigen::VectorXd v_y = random_vector(n, rng);
  const Eigen::MatrixXd solves = random_matrix(n, s, rng);
  const auto derivs = derivative_matrices(X, hyper);
  const GradientEstimate a = assemble_gradient(v_y, solves, probes, derivs);
  const GradientEstimate b = assemble_gradient(v_y, solves, probes, derivs);
  CHECK((a.quadratic_term.array() == b.quadratic_term.array()).all());
  CHECK((a.trace_term.array() == b.trace_term.array()).all());
}

TEST_CASE("unbiasedness at modest probe counts") {
  // Mean of the estimate over many probe redraws approaches the exact
  // gradient; checked against the Monte Carlo standard error.
  std::mt19937_64 rng(61);
  const int n = 60, s = 8, redraws = 400;
  const Eigen::MatrixXd X = random_inputs(n, 2, rng);
  const Eigen::VectorXd y = random_vector(n, rng);
  const auto hyper = Hyperparameters::from_constrained(
      (Eigen::VectorXd(2) << 0.7, 1.1).finished(), 1.0, 0.3);
  const KernelMatrices parts = build_kernel_matrices(X, hyper);
  const Eigen::LLT<Eigen::MatrixXd> llt(parts.system);
  const Eigen::VectorXd v_y = llt.solve(y);
  const Eigen::VectorXd exact = exact_gradient(X, y, hyper);

  const int p = hyper.num_params();
  Eigen::MatrixXd draws(p, redraws);
  for (int r = 0; r < redraws; ++r) {
    const ProbeSet probes = sample_probes(n, s, ProbeDistribution::Gaussian, 1000 + r);
    const Eigen::MatrixXd solves = llt.solve(probes.probes);
    draws.col(r) = assemble_gradient_streamed(v_y, solves, probes, X, hyper, parts).gradient();
  }
  for (int k = 0; k < p; ++k) {
    const double mean = draws.row(k).mean();
    const double sd = std::sqrt((draws.row(k).array() - mean).square().sum() / (redraws - 1));
    const double se = sd / std::sqrt(static_cast<double>(redraws));
    CHECK(std::abs(mean - exact[k]) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("warm start distance") {
  std::mt19937_64 rng(67);
  const int n = 20;
  const Eigen::MatrixXd H = random_spd(n, 0.5, 3.0, rng);

  SUBCASE("zero at the solution") {
    SolveState prev;
    prev.solutions = random_matrix(n, 3, rng);
    CHECK(warm_start_distance(prev, prev.solutions, H) == 0.0);
  }

  SUBCASE("identity H with a unit offset gives 1") {
    SolveState prev;
    prev.solutions = Eigen::MatrixXd::Zero(n, 1);
    const Eigen::MatrixXd target = Eigen::MatrixXd::Ones(n, 1);
    CHECK(warm_start_distance(prev, target, Eigen::MatrixXd::Identity(n, n)) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("matches the dense quadratic form") {
    SolveState prev;
    prev.solutions = random_matrix(n, 4, rng);
    const Eigen::MatrixXd target = random_matrix(n, 4, rng);
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
      const Eigen::VectorXd diff = prev.solutions.col(j) - target.col(j);
      acc += diff.dot(H * diff) / n;
    }
    const double expected = std::sqrt(acc / 4.0);
    CHECK(warm_start_distance(prev, target, H) == doctest::Approx(expected).epsilon(1e-12));
  }
}

}  // TEST_SUITE("estimator")
