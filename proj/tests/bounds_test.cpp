#include <doctest.h>

#include <cmath>
#include <random>

#include "warmgp/bounds.hpp"
#include "test_util.hpp"

using namespace warmgp;
using namespace warmgp::testing;

TEST_SUITE("bounds") {

TEST_CASE("lemma check: degenerate rademacher cell is exactly zero") {
  const BoundReport report = check_lemma_a2(1, 1, ProbeDistribution::Rademacher, 200, 3);
  CHECK(report.theoretical_value == 0.0);
  CHECK(report.empirical_mean == 0.0);
  CHECK(report.standard_error == 0.0);
  CHECK(report.z_score == 0.0);
}

TEST_CASE("lemma check: gaussian n=2 s=4") {
  const BoundReport report = check_lemma_a2(2, 4, ProbeDistribution::Gaussian, 10000, 17);
  CHECK(report.theoretical_value == doctest::Approx(0.75));
  CHECK(std::abs(report.z_score) <= 4.0);
  CHECK(report.standard_error > 0.0);
}

TEST_CASE("lemma check: rademacher n=10 s=5") {
  const BoundReport report = check_lemma_a2(10, 5, ProbeDistribution::Rademacher, 10000, 19);
  CHECK(report.theoretical_value == doctest::Approx(1.8));
  CHECK(std::abs(report.z_score) <= 4.0);
}

TEST_CASE("lemma value does not depend on the unit vector") {
  // Different seeds draw different unit vectors c (and probes); both runs
  // estimate the same constant.
  const BoundReport a = check_lemma_a2(12, 6, ProbeDistribution::Gaussian, 10000, 23);
  const BoundReport b = check_lemma_a2(12, 6, ProbeDistribution::Gaussian, 10000, 977);
  const double pooled = std::sqrt(a.standard_error * a.standard_error +
                                  b.standard_error * b.standard_error);
  CHECK(std::abs(a.empirical_mean - b.empirical_mean) <= 6.0 * pooled);
}

TEST_CASE("rademacher estimator variance is below gaussian at matched (n, s)") {
  const BoundReport gauss = check_lemma_a2(16, 8, ProbeDistribution::Gaussian, 10000, 29);
  const BoundReport rade = check_lemma_a2(16, 8, ProbeDistribution::Rademacher, 10000, 29);
  CHECK(rade.theoretical_value < gauss.theoretical_value);
  CHECK(rade.empirical_mean < gauss.empirical_mean);
}

TEST_CASE("trials guard") {
  CHECK_THROWS_AS(check_lemma_a2(4, 4, ProbeDistribution::Gaussian, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("lambda_max is tight for the noise coordinate") {
  std::mt19937_64 rng(31);
  const Eigen::MatrixXd X = random_inputs(40, 2, rng);
  const auto hyper = Hyperparameters::from_constrained(Eigen::VectorXd::Ones(2), 1.0, 0.5);
  const SpectralBound sb = lambda_max(X, hyper, hyper.num_params() - 1);
  // dH = c I makes the bound an equality: sigma_max(H^-1 c I) = c / lambda_min(H).
  const double c = 2.0 * hyper.noise_scale() * softplus_derivative(hyper.raw_noise());
  CHECK(sb.lambda_dh == doctest::Approx(c).epsilon(1e-10));
  CHECK(std::abs(sb.product_norm - sb.bound) <= 1e-8 * sb.bound);
}

TEST_CASE("lambda_max arithmetic on a scaled-identity system") {
  // Far-apart points with a tiny lengthscale make K = s_f^2 I exactly, so
  // H = (s_f^2 + sigma^2) I = 2 I and every spectral factor is explicit.
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 1.0, 2.0;
  const auto hyper =
      Hyperparameters::from_constrained(Eigen::VectorXd::Constant(1, 1e-6), 1.0, 1.0);
  const SpectralBound sb = lambda_max(X, hyper, hyper.num_params() - 1);
  CHECK(sb.lambda_h_inv == doctest::Approx(0.5).epsilon(1e-12));
  const double c = 2.0 * softplus_derivative(hyper.raw_noise());
  CHECK(sb.bound == doctest::Approx(0.5 * c).epsilon(1e-10));
  CHECK(sb.product_norm == doctest::Approx(0.5 * c).epsilon(1e-8));
}

TEST_CASE("product spectral norm never exceeds the bound") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> uni(0.4, 1.8);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd X = random_inputs(30, 2, rng);
    const auto hyper = Hyperparameters::from_constrained(
        (Eigen::VectorXd(2) << uni(rng), uni(rng)).finished(), uni(rng), 0.2 + 0.2 * uni(rng));
    const int k = rep % hyper.num_params();
    const SpectralBound sb = lambda_max(X, hyper, k);
    CHECK(sb.product_norm <= sb.bound * (1.0 + 1e-10));
  }
}

TEST_CASE("gradient error medians shrink with more probes") {
  std::mt19937_64 rng(41);
  for (int instance = 0; instance < 10; ++instance) {
    const Eigen::MatrixXd X = random_inputs(50, 2, rng);
    const Eigen::VectorXd y = random_vector(50, rng);
    const auto hyper = Hyperparameters::from_constrained(
        (Eigen::VectorXd(2) << 0.8, 1.2).finished(), 1.0, 0.3);
    const GradientErrorTable table =
        gradient_error_histogram(X, y, hyper, {4, 64}, 40, 100 + instance);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[1].q50 < table.rows[0].q50);
  }
}

TEST_CASE("estimator mean over trials matches the exact gradient") {
  std::mt19937_64 rng(43);
  const Eigen::MatrixXd X = random_inputs(60, 2, rng);
  const Eigen::VectorXd y = random_vector(60, rng);
  const auto hyper = Hyperparameters::constant_constrained(2, 1.0);
  const GradientErrorTable table = gradient_error_histogram(X, y, hyper, {16}, 300, 7);
  const GradientErrorRow& row = table.rows[0];
  for (int k = 0; k < table.exact.size(); ++k)
    CHECK(std::abs(row.mean_estimate[k] - table.exact[k]) <= 3.0 * row.standard_error[k] + 1e-12);
}

TEST_CASE("q90 decays at the Monte Carlo rate") {
  std::mt19937_64 rng(47);
  const Eigen::MatrixXd X = random_inputs(60, 2, rng);
  const Eigen::VectorXd y = random_vector(60, rng);
  const auto hyper = Hyperparameters::from_constrained(
      (Eigen::VectorXd(2) << 0.7, 1.4).finished(), 1.1, 0.25);
  const GradientErrorTable table =
      gradient_error_histogram(X, y, hyper, {4, 16, 64, 256}, 150, 11);
  const double slope = table.q90_loglog_slope();
  CHECK(slope >= -0.65);
  CHECK(slope <= -0.35);
}

}  // TEST_SUITE("bounds")
