#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include "warmgp/common.hpp"
#include "warmgp/kernel.hpp"

namespace warmgp {

/// A regression dataset plus the standardization metadata needed to map
/// predictions back to original units. Feature/target statistics are always
/// those of the training split that produced them.
struct Dataset {
  std::string name;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd feature_means;
  Eigen::VectorXd feature_stds;
  double target_mean = 0.0;
  double target_std = 1.0;
  bool standardized = false;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.0;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
};

struct CsvLoadResult {
  Dataset dataset;
  int dropped_rows = 0;  // rows discarded for non-finite values
};

/// Parses a headered CSV, extracting `target_column` as y. Rows containing
/// non-finite values are dropped and counted; malformed cells raise IoError
/// with the offending line number.
CsvLoadResult load_csv(const std::string& path, const std::string& target_column);

/// Deterministic shuffle-split; standardization statistics are computed on
/// the training split only and applied to both. Constant features keep
/// std = 1.
std::pair<Dataset, Dataset> split_standardize(const Dataset& ds, double train_fraction,
                                              std::uint64_t split_seed);

/// Draws a dataset from the GP prior itself: X uniform in [0,1]^d, y from
/// N(0, K + sigma^2 I) at `true_hyper` with its noise scale replaced by
/// `noise_scale`.
Dataset synthesize(int n, int d, const Hyperparameters& true_hyper, double noise_scale,
                   std::uint64_t seed);

/// Convenience: prior draw with unit lengthscales and signal scale.
Dataset synthesize(int n, int d, double noise_scale, std::uint64_t seed);

}  // namespace warmgp
