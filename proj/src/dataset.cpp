#include "warmgp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "warmgp/common.hpp"

namespace warmgp {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, int line_number) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw IoError("csv parse failure at line " + std::to_string(line_number) + ": '" + field + "'");
  return value;
}

}  // namespace

CsvLoadResult load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const std::vector<std::string> header_raw = split_fields(line);
  std::vector<std::string> header;
  header.reserve(header_raw.size());
  for (const auto& h : header_raw) header.push_back(trim(h));

  int target_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == target_column) target_idx = static_cast<int>(i);
  if (target_idx < 0) throw IoError(path + ": no column named '" + target_column + "'");
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) throw IoError(path + ": need at least one feature column");

  std::vector<Eigen::VectorXd> rows;
  std::vector<double> targets;
  int dropped = 0;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != static_cast<int>(header.size()))
      throw IoError("csv parse failure at line " + std::to_string(line_number) +
                    ": expected " + std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    Eigen::VectorXd row(d);
    double target = 0.0;
    bool finite = true;
    int col = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const double v = parse_double(fields[i], line_number);
      if (!std::isfinite(v)) finite = false;
      if (static_cast<int>(i) == target_idx)
        target = v;
      else
        row[col++] = v;
    }
    if (!finite) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(row));
    targets.push_back(target);
  }
  if (rows.size() < 2) throw IoError(path + ": need at least 2 usable rows");

  CsvLoadResult result;
  result.dropped_rows = dropped;
  result.dataset.name = path;
  result.dataset.X.resize(static_cast<Eigen::Index>(rows.size()), d);
  result.dataset.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    result.dataset.X.row(static_cast<Eigen::Index>(i)) = rows[i];
    result.dataset.y[static_cast<Eigen::Index>(i)] = targets[i];
  }
  const double spread = result.dataset.y.maxCoeff() - result.dataset.y.minCoeff();
  if (spread == 0.0) throw IoError(path + ": target column is constant");
  return result;
}

std::pair<Dataset, Dataset> split_standardize(const Dataset& ds, double train_fraction,
                                              std::uint64_t split_seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_standardize: train_fraction must lie in (0, 1)");
  const Eigen::Index n = ds.n();
  const auto n_train = static_cast<Eigen::Index>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n)
    throw std::invalid_argument("split_standardize: split leaves an empty train or test set");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(split_seed, 0x5b117ULL));
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(uniform_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }

  auto take = [&](Eigen::Index begin, Eigen::Index count) {
    Dataset out;
    out.name = ds.name;
    out.split_seed = split_seed;
    out.train_fraction = train_fraction;
    out.X.resize(count, ds.d());
    out.y.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      out.X.row(i) = ds.X.row(order[begin + i]);
      out.y[i] = ds.y[order[begin + i]];
    }
    return out;
  };
  Dataset train = take(0, n_train);
  Dataset test = take(n_train, n - n_train);

  // Statistics from the training split only.
  Eigen::VectorXd means = train.X.colwise().mean();
  Eigen::VectorXd stds(ds.d());
  for (Eigen::Index k = 0; k < ds.d(); ++k) {
    const double var = (train.X.col(k).array() - means[k]).square().mean();
    const double sd = std::sqrt(var);
    stds[k] = sd > 0.0 ? sd : 1.0;
  }
  const double y_mean = train.y.mean();
  const double y_var = (train.y.array() - y_mean).square().mean();
  const double y_std = y_var > 0.0 ? std::sqrt(y_var) : 1.0;

  for (Dataset* part : {&train, &test}) {
    for (Eigen::Index k = 0; k < ds.d(); ++k)
      part->X.col(k) = (part->X.col(k).array() - means[k]) / stds[k];
    part->y = (part->y.array() - y_mean) / y_std;
    part->feature_means = means;
    part->feature_stds = stds;
    part->target_mean = y_mean;
    part->target_std = y_std;
    part->standardized = true;
  }
  return {std::move(train), std::move(test)};
}

Dataset synthesize(int n, int d, const Hyperparameters& true_hyper, double noise_scale,
                   std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("synthesize: n and d must be >= 1");
  Hyperparameters hyper = Hyperparameters::from_constrained(
      true_hyper.lengthscales(), true_hyper.signal_scale(), noise_scale);

  std::mt19937_64 rng(derive_seed(seed, 0xda7a));
  Dataset ds;
  ds.name = "synthetic-n" + std::to_string(n) + "-d" + std::to_string(d) + "-seed" +
            std::to_string(seed);
  ds.X.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) ds.X(i, k) = uniform_unit(rng);

  const Eigen::MatrixXd H = system_matrix(ds.X, hyper);
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw NumericalError("synthesize: draw covariance is not positive definite");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(n);
  for (int i = 0; i < n; ++i) xi[i] = normal(rng);
  ds.y = llt.matrixL() * xi;
  return ds;
}

Dataset synthesize(int n, int d, double noise_scale, std::uint64_t seed) {
  return synthesize(n, d, Hyperparameters::constant_constrained(d, 1.0), noise_scale, seed);
}

}  // namespace warmgp
