#include "warmgp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "warmgp/common.hpp"

namespace warmgp {

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Cg: return "cg";
    case SolverKind::Ap: return "ap";
    case SolverKind::Sgd: return "sgd";
  }
  return "?";
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "cg") return SolverKind::Cg;
  if (name == "ap") return SolverKind::Ap;
  if (name == "sgd") return SolverKind::Sgd;
  throw std::invalid_argument("unknown solver kind: " + name);
}

void SolverConfig::validate() const {
  if (!(tol_mean > 0.0 && tol_mean < 1.0) || !(tol_samples > 0.0 && tol_samples < 1.0))
    throw std::invalid_argument("SolverConfig: tolerances must lie in (0, 1)");
  if (block_size < 1) throw std::invalid_argument("SolverConfig: block_size must be >= 1");
  if (minibatch_size < 1) throw std::invalid_argument("SolverConfig: minibatch_size must be >= 1");
  if (max_iterations < 0) throw std::invalid_argument("SolverConfig: max_iterations must be >= 0");
}

bool SolveState::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

namespace {

struct Tolerances {
  Eigen::VectorXd b_norms;
  Eigen::VectorXd tols;
};

Tolerances column_tolerances(const Eigen::MatrixXd& rhs, double tol_mean, double tol_samples) {
  Tolerances t;
  const Eigen::Index cols = rhs.cols();
  t.b_norms = rhs.colwise().norm();
  t.tols.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) t.tols[j] = j == 0 ? tol_mean : tol_samples;
  return t;
}

void check_shapes(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                  const Eigen::MatrixXd& init) {
  if (H.rows() != H.cols()) throw std::invalid_argument("solve: H must be square");
  if (rhs.rows() != H.rows()) throw std::invalid_argument("solve: rhs row count mismatch");
  if (rhs.cols() < 1) throw std::invalid_argument("solve: rhs needs at least one column");
  if (init.rows() != rhs.rows() || init.cols() != rhs.cols())
    throw std::invalid_argument("solve: init shape must match rhs");
  if (!rhs.allFinite() || !init.allFinite())
    throw std::invalid_argument("solve: non-finite right-hand side or init");
}

void finalize_exact_residuals(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                              SolveState& state, const Tolerances& tol) {
  const Eigen::MatrixXd exact = rhs - H * state.solutions;
  state.per_column_relative_residual.resize(rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
    state.per_column_relative_residual[j] =
        tol.b_norms[j] > 0.0 ? exact.col(j).norm() / tol.b_norms[j] : 0.0;
  }
}

}  // namespace

SolveState cg_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                    const Eigen::MatrixXd& init, double tol_mean, double tol_samples,
                    int max_iterations) {
  check_shapes(H, rhs, init);
  const Eigen::Index n = H.rows();
  const Eigen::Index cols = rhs.cols();
  const Tolerances tol = column_tolerances(rhs, tol_mean, tol_samples);
  if (max_iterations <= 0) max_iterations = 10 * static_cast<int>(n);

  SolveState state;
  state.solutions = init;
  state.residuals = rhs - H * init;
  state.converged.assign(cols, false);

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, cols);
  Eigen::VectorXd rs(cols);
  // Zero right-hand sides count as converged with solution = init.
  for (Eigen::Index j = 0; j < cols; ++j) {
    rs[j] = state.residuals.col(j).squaredNorm();
    if (tol.b_norms[j] == 0.0 || std::sqrt(rs[j]) <= tol.tols[j] * tol.b_norms[j]) {
      state.converged[j] = true;
    } else {
      P.col(j) = state.residuals.col(j);
    }
  }

  int it = 0;
  while (!state.all_converged() && it < max_iterations) {
    ++it;
    const Eigen::MatrixXd HP = H * P;
    const bool refresh = (it % 50 == 0);
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (state.converged[j]) continue;
      const double pHp = P.col(j).dot(HP.col(j));
      if (!(pHp > 0.0))
        throw NumericalError("cg_solve: non-positive curvature encountered, H is not positive definite");
      const double alpha = rs[j] / pHp;
      state.solutions.col(j) += alpha * P.col(j);
      if (refresh) {
        state.residuals.col(j) = rhs.col(j) - H * state.solutions.col(j);
      } else {
        state.residuals.col(j) -= alpha * HP.col(j);
      }
      const double rs_new = state.residuals.col(j).squaredNorm();
      if (!std::isfinite(rs_new))
        throw NumericalError("cg_solve: NaN in iterate at iteration " + std::to_string(it));
      if (std::sqrt(rs_new) <= tol.tols[j] * tol.b_norms[j]) {
        state.converged[j] = true;
        P.col(j).setZero();
      } else {
        P.col(j) = state.residuals.col(j) + (rs_new / rs[j]) * P.col(j);
      }
      rs[j] = rs_new;
    }
  }
  state.iterations_used = it;
  finalize_exact_residuals(H, rhs, state, tol);
  return state;
}

SolveState ap_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                    const Eigen::MatrixXd& init, double tol_mean, double tol_samples,
                    int block_size, int max_epochs) {
  check_shapes(H, rhs, init);
  const Eigen::Index n = H.rows();
  const Eigen::Index cols = rhs.cols();
  const Tolerances tol = column_tolerances(rhs, tol_mean, tol_samples);
  if (max_epochs <= 0) max_epochs = 1000;
  const Eigen::Index bs = std::min<Eigen::Index>(std::max(block_size, 1), n);

  // Contiguous blocks in fixed order; diagonal blocks factorized once.
  struct Block {
    Eigen::Index start, size;
    Eigen::LLT<Eigen::MatrixXd> llt;
  };
  std::vector<Block> blocks;
  for (Eigen::Index start = 0; start < n; start += bs) {
    Block blk;
    blk.start = start;
    blk.size = std::min(bs, n - start);
    blk.llt.compute(H.block(blk.start, blk.start, blk.size, blk.size));
    if (blk.llt.info() != Eigen::Success)
      throw NumericalError("ap_solve: diagonal block factorization failed, H is not positive definite");
    blocks.push_back(std::move(blk));
  }

  SolveState state;
  state.solutions = init;
  state.residuals = rhs - H * init;
  state.converged.assign(cols, false);

  auto update_convergence = [&]() {
    for (Eigen::Index j = 0; j < cols; ++j) {
      state.converged[j] = tol.b_norms[j] == 0.0 ||
                           state.residuals.col(j).norm() <= tol.tols[j] * tol.b_norms[j];
    }
  };
  update_convergence();

  int epoch = 0;
  while (!state.all_converged() && epoch < max_epochs) {
    ++epoch;
    for (const Block& blk : blocks) {
      const Eigen::MatrixXd delta = blk.llt.solve(state.residuals.middleRows(blk.start, blk.size));
      state.solutions.middleRows(blk.start, blk.size) += delta;
      state.residuals.noalias() -= H.middleCols(blk.start, blk.size) * delta;
    }
    state.residuals = rhs - H * state.solutions;  // exact refresh, once per epoch
    if (!state.residuals.allFinite())
      throw NumericalError("ap_solve: NaN in iterate at epoch " + std::to_string(epoch));
    update_convergence();
  }
  state.iterations_used = epoch;
  finalize_exact_residuals(H, rhs, state, tol);
  return state;
}

SolveState sgd_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                     const Eigen::MatrixXd& init, double tol_mean, double tol_samples,
                     int minibatch_size, double momentum, double learning_rate,
                     int max_steps, std::uint64_t seed) {
  check_shapes(H, rhs, init);
  const Eigen::Index n = H.rows();
  const Eigen::Index cols = rhs.cols();
  const Tolerances tol = column_tolerances(rhs, tol_mean, tol_samples);
  const Eigen::Index m = std::min<Eigen::Index>(std::max(minibatch_size, 1), n);
  if (max_steps <= 0) max_steps = static_cast<int>((100 * n) / m);

  SolveState state;
  state.solutions = init;
  state.residuals = rhs - H * init;  // estimate; exact at step 0
  state.converged.assign(cols, false);

  auto update_convergence = [&]() {
    for (Eigen::Index j = 0; j < cols; ++j) {
      state.converged[j] = tol.b_norms[j] == 0.0 ||
                           state.residuals.col(j).norm() <= tol.tols[j] * tol.b_norms[j];
    }
  };
  update_convergence();

  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, cols);
  // Row-major copy so that minibatch row gathering is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> H_by_rows = H;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> H_rows(m, n);
  Eigen::MatrixXd batch_residual(m, cols);
  std::vector<Eigen::Index> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(seed);
  const double grad_scale = static_cast<double>(n) / static_cast<double>(m);
  const double step_scale = learning_rate / static_cast<double>(n);

  int step = 0;
  while (!state.all_converged() && step < max_steps) {
    ++step;
    // Partial Fisher-Yates: the first m pool entries become the minibatch.
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = i + static_cast<Eigen::Index>(uniform_below(rng, n - i));
      std::swap(pool[i], pool[j]);
    }
    for (Eigen::Index i = 0; i < m; ++i) H_rows.row(i) = H_by_rows.row(pool[i]);
    batch_residual.noalias() = -(H_rows * state.solutions);
    for (Eigen::Index i = 0; i < m; ++i) batch_residual.row(i) += rhs.row(pool[i]);

    // Momentum step on the sampled rows; the quadratic's gradient rows are
    // -residual rows, importance-scaled by n / m.
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index row = pool[i];
      velocity.row(row) = momentum * velocity.row(row) - grad_scale * batch_residual.row(i);
      state.solutions.row(row) -= step_scale * velocity.row(row);
      state.residuals.row(row) = batch_residual.row(i);  // sparse estimate update
    }

    const double sol_norm = state.solutions.norm();
    if (!std::isfinite(sol_norm) || sol_norm > 1e12)
      throw NumericalError("sgd_solve: iterate diverged at step " + std::to_string(step) +
                           "; use a smaller learning rate");
    update_convergence();
  }
  state.iterations_used = step;
  finalize_exact_residuals(H, rhs, state, tol);
  return state;
}

SolveState solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                 const Eigen::MatrixXd& init, const SolverConfig& config) {
  config.validate();
  switch (config.kind) {
    case SolverKind::Cg:
      return cg_solve(H, rhs, init, config.tol_mean, config.tol_samples, config.max_iterations);
    case SolverKind::Ap:
      return ap_solve(H, rhs, init, config.tol_mean, config.tol_samples, config.block_size,
                      config.max_iterations);
    case SolverKind::Sgd:
      return sgd_solve(H, rhs, init, config.tol_mean, config.tol_samples, config.minibatch_size,
                       config.momentum, config.learning_rate, config.max_iterations, config.seed);
  }
  throw std::invalid_argument("solve: unknown solver kind");
}

SolveState solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& rhs,
                 const SolverConfig& config) {
  return solve(H, rhs, Eigen::MatrixXd::Zero(rhs.rows(), rhs.cols()), config);
}

}  // namespace warmgp
