#include "warmgp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "warmgp/common.hpp"
#include "warmgp/exact.hpp"

namespace warmgp {

namespace {

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                 static_cast<double>(values.size()));
  }
  return a;
}

}  // namespace

std::vector<GridEntry> paired_grid(const std::vector<SolverKind>& solvers,
                                   const TrainConfig& base) {
  std::vector<GridEntry> grid;
  for (SolverKind kind : solvers) {
    TrainConfig cold = base;
    cold.solver.kind = kind;
    cold.mode = TrainMode::ColdStartResampled;
    grid.push_back({std::string(to_string(kind)) + "/cold", cold});
    TrainConfig warm = cold;
    warm.mode = TrainMode::WarmStartFixedProbes;
    grid.push_back({std::string(to_string(kind)) + "/warm", warm});
  }
  return grid;
}

ExperimentResult run_experiment(const Dataset& ds, const std::vector<GridEntry>& grid,
                                const ExperimentOptions& options) {
  if (grid.empty()) throw std::invalid_argument("run_experiment: empty config grid");
  if (options.splits < 1) throw std::invalid_argument("run_experiment: splits must be >= 1");

  ExperimentResult result;
  result.dataset = ds.name;
  result.splits = options.splits;
  result.train_fraction = options.train_fraction;

  for (int split = 0; split < options.splits; ++split) {
    const std::uint64_t split_seed = derive_seed(options.seed, 0x3711700ULL + split);
    const auto [train_ds, test_ds] = split_standardize(ds, options.train_fraction, split_seed);
    // Paired entries share the same training seed on each split.
    const std::uint64_t train_seed = derive_seed(options.seed, 0x7ea1ULL + split);

    for (const GridEntry& entry : grid) {
      TrainConfig config = entry.config;
      config.seed = train_seed;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        OptTrace trace = train(train_ds.X, train_ds.y, config);
        const double total_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        RunRecord rec;
        rec.label = entry.label;
        rec.solver = config.solver.kind;
        rec.mode = config.mode;
        rec.split_index = split;
        rec.split_seed = split_seed;
        rec.train_seed = train_seed;
        rec.total_runtime_seconds = total_seconds;
        for (const StepRecord& s : trace.steps) {
          rec.solver_runtime_seconds += s.solver_seconds;
          rec.per_step_iterations.push_back(s.solver_iterations);
        }
        const Hyperparameters final_hyper =
            trace.final_hyperparameters(static_cast<int>(train_ds.d()));
        rec.final_constrained = final_hyper.to_constrained_vector();
        const PredictiveDistribution pred =
            predict(train_ds.X, train_ds.y, test_ds.X, final_hyper);
        const TestMetrics metrics = test_metrics(pred, test_ds.y);
        rec.test_rmse = metrics.rmse;
        rec.test_llh = metrics.mean_loglik;
        if (options.keep_traces) rec.trace = std::move(trace);
        result.runs.push_back(std::move(rec));
      } catch (const NumericalError& e) {
        throw NumericalError("split " + std::to_string(split) + ", config " + entry.label +
                             ": " + e.what());
      }
    }
  }

  // Aggregates per label.
  for (const GridEntry& entry : grid) {
    std::vector<double> rmse, llh, total, solver;
    for (const RunRecord& rec : result.runs) {
      if (rec.label != entry.label) continue;
      rmse.push_back(rec.test_rmse);
      llh.push_back(rec.test_llh);
      total.push_back(rec.total_runtime_seconds);
      solver.push_back(rec.solver_runtime_seconds);
    }
    LabelSummary summary;
    summary.rmse = aggregate(rmse);
    summary.llh = aggregate(llh);
    summary.total_runtime = aggregate(total);
    summary.solver_runtime = aggregate(solver);
    result.summaries[entry.label] = summary;
  }

  // Speed-up per solver where a cold/warm pair exists.
  for (SolverKind kind : {SolverKind::Cg, SolverKind::Ap, SolverKind::Sgd}) {
    const std::string cold_label = std::string(to_string(kind)) + "/cold";
    const std::string warm_label = std::string(to_string(kind)) + "/warm";
    const auto cold_it = result.summaries.find(cold_label);
    const auto warm_it = result.summaries.find(warm_label);
    if (cold_it != result.summaries.end() && warm_it != result.summaries.end() &&
        warm_it->second.total_runtime.mean > 0.0) {
      result.speed_up[to_string(kind)] =
          cold_it->second.total_runtime.mean / warm_it->second.total_runtime.mean;
    }
  }
  return result;
}

double grid_search_sgd_lr(const Dataset& ds, const std::vector<double>& candidate_lrs,
                          int budget_steps, const TrainConfig& base) {
  if (candidate_lrs.size() < 2)
    throw std::invalid_argument("grid_search_sgd_lr: need at least 2 candidates");
  if (budget_steps < 1) throw std::invalid_argument("grid_search_sgd_lr: budget must be >= 1");

  const Hyperparameters hyper =
      Hyperparameters::constant_constrained(static_cast<int>(ds.d()), base.init_constrained);
  const Eigen::MatrixXd H = system_matrix(ds.X, hyper);
  const Eigen::MatrixXd rhs = ds.y;

  double best_lr = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();
  std::string diverged;
  for (double lr : candidate_lrs) {
    SolverConfig config = base.solver;
    config.kind = SolverKind::Sgd;
    config.learning_rate = lr;
    config.max_iterations = budget_steps;
    config.tol_mean = config.tol_samples = 1e-12;  // run the full budget
    config.seed = derive_seed(base.seed, 0x9f1dULL);
    try {
      const SolveState state = solve(H, rhs, config);
      const double residual = state.per_column_relative_residual[0];
      if (residual < best_residual) {
        best_residual = residual;
        best_lr = lr;
      }
    } catch (const NumericalError&) {
      diverged += (diverged.empty() ? "" : ", ") + std::to_string(lr);
    }
  }
  if (best_residual == std::numeric_limits<double>::infinity())
    throw NumericalError("grid_search_sgd_lr: all candidates diverged: " + diverged);
  return best_lr;
}

}  // namespace warmgp
