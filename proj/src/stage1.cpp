#include "kimpute/stage1.hpp"

#include <cmath>
#include <stdexcept>

namespace kimpute {

namespace {

Matrix conjugate(const Vector& ay, const Matrix& M) {
  return ay.asDiagonal() * M * ay.asDiagonal();
}

double max_bound_violation(const Matrix& K, const Matrix& B_l,
                           const Matrix& B_u) {
  const double over = (K - B_u).maxCoeff();
  const double under = (B_l - K).maxCoeff();
  return std::max({over, under, 0.0});
}

}  // namespace

Matrix step1_update_kdelta(const Stage1State& state, const BoundedKernel& bk,
                           const Vector& y, const Stage1Config& config,
                           ProjectionResult* info) {
  const Index n = y.size();
  const Vector ay = state.alpha.cwiseProduct(y);
  const Matrix hat_K =
      Matrix::Ones(n, n) +
      conjugate(ay, bk.K_o.cwiseProduct(state.E)) / (4.0 * config.eta);

  ProjectionOptions opts;
  opts.soft_iters = config.qp_soft_iters;
  opts.soft_iters_warm = config.qp_soft_iters_warm;
  if (state.iter > 1) opts.warm_start = &state.K_delta;
  ProjectionResult res = project_adjustment(hat_K, bk.B_l, bk.B_u, opts);
  if (info != nullptr) *info = res;
  return std::move(res.K);
}

Matrix step2_update_e(const Stage1State& state, const BoundedKernel& bk,
                      const Vector& y, const Stage1Config& config) {
  const Index n = y.size();
  const Vector ay = state.alpha.cwiseProduct(y);
  const Matrix gamma = conjugate(ay, bk.K_o.cwiseProduct(state.K_delta));
  return psd_project(Matrix::Ones(n, n) - gamma / (4.0 * config.rho));
}

Vector step3_update_alpha(const Stage1State& state, const BoundedKernel& bk,
                          const Vector& y, const Stage1Config& config) {
  const Matrix K_eff =
      bk.K_o.cwiseProduct(state.K_delta).cwiseProduct(state.E);
  const double lr = 0.1 * config.C / std::max(state.iter, 1);
  return ascend_alpha(state.alpha, K_eff, y, config.C, lr,
                      config.alpha_steps_per_iter);
}

double stage1_loss(const Stage1State& state, const BoundedKernel& bk,
                   const Vector& y, const Stage1Config& config) {
  const Index n = y.size();
  const Matrix K_eff =
      bk.K_o.cwiseProduct(state.K_delta).cwiseProduct(state.E);
  const double svm_part = dual_objective(state.alpha, K_eff, y);
  const double pull = (state.K_delta - Matrix::Ones(n, n)).squaredNorm();
  return svm_part + config.eta * pull;
}

Stage1Result run_stage1(const BoundedKernel& bk, const Vector& y,
                        const Stage1Config& config) {
  if (config.eta <= 0.0 || config.rho <= 0.0 || config.C <= 0.0)
    throw std::invalid_argument("stage 1 requires positive C, eta, rho");
  if (config.loss_tol <= 0.0)
    throw std::invalid_argument("stage 1 requires a positive loss tolerance");
  if (!bk.stage1_compatible)
    throw std::invalid_argument(
        "stage 1 needs strictly positive observed kernel entries");

  const Index n = y.size();
  Stage1State state;
  state.K_delta = Matrix::Ones(n, n);
  state.E = Matrix::Ones(n, n);
  state.alpha = Vector::Constant(n, config.C / 2.0);

  Stage1Result result;
  bool converged = false;

  double prev_loss = 0.0;
  double best_dloss = std::numeric_limits<double>::infinity();
  Matrix best_K_delta = state.K_delta;
  Matrix best_E = state.E;
  Vector best_alpha = state.alpha;

  for (int t = 1; t <= config.max_iters; ++t) {
    state.iter = t;
    const Matrix K_delta_prev = state.K_delta;

    ProjectionResult proj;
    state.K_delta = step1_update_kdelta(state, bk, y, config, &proj);
    result.qp_fallback_used = result.qp_fallback_used || proj.used_fallback;
    state.E = step2_update_e(state, bk, y, config);
    state.alpha = step3_update_alpha(state, bk, y, config);

    const double loss = stage1_loss(state, bk, y, config);
    result.trace.loss.push_back(loss);
    result.trace.kdelta_step_norm.push_back(
        (state.K_delta - K_delta_prev).norm());
    result.trace.min_eig_E.push_back(min_eigenvalue(state.E));
    result.trace.bound_violation_max.push_back(
        max_bound_violation(state.K_delta, bk.B_l, bk.B_u));

    if (t == 1) {
      result.trace.abs_dloss.push_back(
          std::numeric_limits<double>::quiet_NaN());
    } else {
      const double dloss = std::abs(loss - prev_loss);
      result.trace.abs_dloss.push_back(dloss);
      if (dloss < best_dloss) {
        best_dloss = dloss;
        best_K_delta = state.K_delta;
        best_E = state.E;
        best_alpha = state.alpha;
      }
      if (dloss < config.loss_tol) {
        converged = true;
        break;
      }
    }
    prev_loss = loss;
  }

  if (!converged && best_dloss < std::numeric_limits<double>::infinity()) {
    state.K_delta = best_K_delta;  // best iterate by loss settlement
    state.E = best_E;
    state.alpha = best_alpha;
  }

  result.converged = converged;
  result.K_tilde = bk.K_o.cwiseProduct(state.K_delta);
  result.K_delta = state.K_delta;
  result.E = state.E;
  if (config.refit_alpha) {
    result.dual = train_dual(result.K_tilde, y, config.C, config.refit_blocks);
  } else {
    result.dual.alpha = state.alpha;
    result.dual.objective = dual_objective(state.alpha, result.K_tilde, y);
    result.dual.bias = recover_bias(state.alpha, result.K_tilde, y, config.C,
                                    &result.dual.bias_degenerate);
    const double tol = 1e-6 * config.C;
    for (Index i = 0; i < n; ++i)
      if (state.alpha[i] > tol) result.dual.support_indices.push_back(i);
  }
  return result;
}

Stage1Result run_stage1(const IncompleteDataset& ds,
                        const Stage1Config& config) {
  const BoundedKernel bk = observed_kernel_with_bounds(config.kernel, ds);
  return run_stage1(bk, ds.labels, config);
}

}  // namespace kimpute
