#include "warmgp/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "warmgp/common.hpp"
#include "warmgp/exact.hpp"

namespace warmgp {

namespace {

// Seed stream reserved for per-step solver RNG (SGD minibatch sampling).
constexpr std::uint64_t kSolverStream = 0x736f6c7665ULL;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::WarmStartFixedProbes: return "warm";
    case TrainMode::ColdStartResampled: return "cold";
    case TrainMode::ColdStartFixedProbes: return "cold-fixed";
  }
  return "?";
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "warm") return TrainMode::WarmStartFixedProbes;
  if (name == "cold") return TrainMode::ColdStartResampled;
  if (name == "cold-fixed") return TrainMode::ColdStartFixedProbes;
  throw std::invalid_argument("unknown train mode: " + name);
}

void TrainConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
  if (num_probes < 1) throw std::invalid_argument("TrainConfig: num_probes must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (!(init_constrained > 0.0))
    throw std::invalid_argument("TrainConfig: initial constrained value must be positive");
  solver.validate();
}

void adam_step(Eigen::VectorXd& raw_params, const Eigen::VectorXd& grad, AdamState& state,
               int t, const TrainConfig& config) {
  if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
  if (grad.size() != raw_params.size() || state.m.size() != raw_params.size() ||
      state.v.size() != raw_params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grad.allFinite())
    throw NumericalError("adam_step: non-finite gradient at step " + std::to_string(t));

  state.m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * grad;
  state.v = config.adam_beta2 * state.v + (1.0 - config.adam_beta2) * grad.cwiseProduct(grad);
  const double corr1 = 1.0 - std::pow(config.adam_beta1, t);
  const double corr2 = 1.0 - std::pow(config.adam_beta2, t);
  const Eigen::ArrayXd m_hat = state.m.array() / corr1;
  const Eigen::ArrayXd v_hat = state.v.array() / corr2;
  // Ascent: parameters move along the gradient.
  raw_params.array() += config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
}

Hyperparameters OptTrace::final_hyperparameters(int input_dim) const {
  if (steps.empty()) throw std::logic_error("OptTrace: empty trace");
  return Hyperparameters::from_raw_vector(input_dim, steps.back().raw_params);
}

long OptTrace::total_solver_iterations(int first, int last) const {
  long total = 0;
  for (const StepRecord& rec : steps)
    if (rec.step >= first && rec.step <= last) total += rec.solver_iterations;
  return total;
}

namespace {

OptTrace run_loop(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& config,
                  bool exact_gradients) {
  config.validate();
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::invalid_argument("train: dataset is empty");
  if (y.size() != n) throw std::invalid_argument("train: X and y disagree on n");

  const int d = static_cast<int>(X.cols());
  Hyperparameters hyper = Hyperparameters::constant_constrained(d, config.init_constrained);
  Eigen::VectorXd raw = hyper.to_raw_vector();
  AdamState adam = AdamState::zero(hyper.num_params());

  const bool fixed_probes = config.mode != TrainMode::ColdStartResampled;
  const bool warm_start = config.mode == TrainMode::WarmStartFixedProbes;

  // Fixed-probe modes draw once with the step-1 seed and reuse the set, so
  // all three modes coincide bitwise at the first step.
  ProbeSet probes;
  if (!exact_gradients && fixed_probes) {
    probes = sample_probes(static_cast<int>(n), config.num_probes, config.probe_distribution,
                           derive_seed(config.seed, 1));
    probes.fixed = true;
  }

  OptTrace trace;
  trace.steps.reserve(config.steps);
  Eigen::MatrixXd prev_solutions;
  const auto t_start = std::chrono::steady_clock::now();

  for (int t = 1; t <= config.steps; ++t) {
    try {
      hyper = Hyperparameters::from_raw_vector(d, raw);
      StepRecord rec;
      rec.step = t;

      Eigen::VectorXd grad;
      if (exact_gradients) {
        grad = exact_gradient(X, y, hyper);
        rec.gradient = grad;
      } else {
        const KernelMatrices parts = build_kernel_matrices(X, hyper);
        if (!fixed_probes) {
          probes = sample_probes(static_cast<int>(n), config.num_probes,
                                 config.probe_distribution, derive_seed(config.seed, t));
          probes.fixed = false;
        }
        Eigen::MatrixXd rhs(n, config.num_probes + 1);
        rhs.col(0) = y;
        rhs.rightCols(config.num_probes) = probes.probes;

        SolverConfig solver_config = config.solver;
        solver_config.seed = derive_seed(derive_seed(config.seed, kSolverStream), t);
        const bool have_warm = warm_start && prev_solutions.size() > 0;
        const Eigen::MatrixXd init =
            have_warm ? prev_solutions : Eigen::MatrixXd::Zero(n, rhs.cols());

        const auto t_solve = std::chrono::steady_clock::now();
        SolveState state = solve(parts.system, rhs, init, solver_config);
        rec.solver_seconds = seconds_since(t_solve);
        rec.solver_iterations = state.iterations_used;
        rec.per_column_relative_residual = state.per_column_relative_residual;
        rec.probe_seed = probes.seed;
        if (have_warm) {
          SolveState init_state;
          init_state.solutions = init;
          rec.warm_start_distance = warm_start_distance(init_state, state.solutions, parts.system);
        }
        if (config.record_solver_state) {
          rec.solver_init = init;
          rec.solver_solutions = state.solutions;
        }

        const GradientEstimate est = assemble_gradient_streamed(
            state.solutions.col(0), state.solutions.rightCols(config.num_probes), probes, X,
            hyper, parts);
        grad = est.gradient();
        rec.gradient = grad;
        prev_solutions = std::move(state.solutions);
      }

      adam_step(raw, grad, adam, t, config);
      rec.raw_params = raw;
      rec.constrained_params = Hyperparameters::from_raw_vector(d, raw).to_constrained_vector();
      rec.cumulative_seconds = seconds_since(t_start);
      trace.steps.push_back(std::move(rec));
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(t) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace

OptTrace train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& config) {
  return run_loop(X, y, config, /*exact_gradients=*/false);
}

OptTrace train_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const TrainConfig& config) {
  return run_loop(X, y, config, /*exact_gradients=*/true);
}

}  // namespace warmgp
