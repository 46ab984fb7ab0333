#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "warmgp/dataset.hpp"
#include "warmgp/optimizer.hpp"

namespace warmgp {

/// One labelled training configuration inside a benchmark grid, e.g. cg/warm.
struct GridEntry {
  std::string label;
  TrainConfig config;
};

/// Outcome of one (config, split) training run.
struct RunRecord {
  std::string label;
  SolverKind solver = SolverKind::Cg;
  TrainMode mode = TrainMode::WarmStartFixedProbes;
  int split_index = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t train_seed = 0;
  double test_rmse = 0.0;
  double test_llh = 0.0;
  double total_runtime_seconds = 0.0;
  double solver_runtime_seconds = 0.0;
  std::vector<int> per_step_iterations;
  Eigen::VectorXd final_constrained;
  OptTrace trace;
};

struct Aggregate {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct LabelSummary {
  Aggregate rmse;
  Aggregate llh;
  Aggregate total_runtime;
  Aggregate solver_runtime;
};

struct ExperimentResult {
  std::string dataset;
  int splits = 0;
  double train_fraction = 0.9;
  std::vector<RunRecord> runs;
  std::map<std::string, LabelSummary> summaries;           // by label
  std::map<std::string, double> speed_up;                  // by solver name, cold/warm
};

struct ExperimentOptions {
  int splits = 10;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  bool keep_traces = true;  // include per-step traces in the result
};

/// Runs every grid entry on every split (split seeds derived from
/// options.seed), evaluates test metrics with the exact predictor at the
/// final hyperparameters, and aggregates. Paired warm/cold entries for the
/// same solver share split and training seeds, and a cold/warm total-runtime
/// speed-up is reported per solver when both labels are present.
ExperimentResult run_experiment(const Dataset& ds, const std::vector<GridEntry>& grid,
                                const ExperimentOptions& options);

/// Builds the paper-style benchmark grid: for each requested solver, a
/// cold-start resampled-probe entry ("<solver>/cold") and a warm-start
/// fixed-probe entry ("<solver>/warm") sharing the same base config.
std::vector<GridEntry> paired_grid(const std::vector<SolverKind>& solvers,
                                   const TrainConfig& base);

/// Short-solve grid search for the SGD learning rate at the initial
/// hyperparameters: runs `budget_steps` SGD steps per candidate and picks the
/// one with the smallest exact relative residual; diverging candidates are
/// excluded, and an error lists them if none survive.
double grid_search_sgd_lr(const Dataset& ds, const std::vector<double>& candidate_lrs,
                          int budget_steps, const TrainConfig& base);

}  // namespace warmgp
