#include "kimpute/stage2.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kimpute {

Matrix stage2_log_target(const Matrix& K_target, double gamma,
                         double kernel_floor) {
  if (gamma <= 0.0) throw std::invalid_argument("stage 2 requires gamma > 0");
  if (kernel_floor <= 0.0)
    throw std::invalid_argument("stage 2 requires a positive kernel floor");
  Matrix out(K_target.rows(), K_target.cols());
  for (Index j = 0; j < K_target.cols(); ++j)
    for (Index i = 0; i < K_target.rows(); ++i)
      out(i, j) = std::log(std::max(K_target(i, j), kernel_floor)) / gamma;
  if (!out.allFinite())
    throw std::runtime_error("stage 2: non-finite kernel target");
  return out;
}

double stage2_objective(const IncompleteDataset& ds, const Matrix& delta_X,
                        const Matrix& K_target, double gamma,
                        double kernel_floor) {
  const Matrix log_target = stage2_log_target(K_target, gamma, kernel_floor);
  const Matrix Xe = ds.features + delta_X;
  const Index n = Xe.cols();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double r = (Xe.col(i) - Xe.col(j)).squaredNorm() + log_target(i, j);
      total += 2.0 * r * r;
    }
  }
  return total;
}

double update_column(const IncompleteDataset& ds, Matrix& delta_X, Index column,
                     const Matrix& log_target, const Stage2Config& config) {
  const Index d = ds.feature_count();
  const Index n = ds.sample_count();

  std::vector<Index> free_coords;
  for (Index p = 0; p < d; ++p)
    if (ds.mask(p, column) < 0.5) free_coords.push_back(p);

  const Matrix Xe = ds.features + delta_X;
  const Vector base = ds.features.col(column);

  // f(cand) = sum_{j != i} r_j^2 with r_j = ||cand - xe_j||^2 + log_target.
  auto residuals = [&](const Vector& cand) {
    Vector r(n);
    for (Index j = 0; j < n; ++j)
      r[j] = j == column
                 ? 0.0
                 : (cand - Xe.col(j)).squaredNorm() + log_target(j, column);
    return r;
  };
  auto value_of = [&](const Vector& r) { return r.squaredNorm(); };

  Vector cand = base + delta_X.col(column);
  Vector r = residuals(cand);
  double f = value_of(r);
  if (free_coords.empty()) return f;  // nothing to move

  auto project = [&](Vector x) {
    Vector dx = Vector::Zero(d);
    for (Index p : free_coords)
      dx[p] = std::clamp(x[p], -base[p], 1.0 - base[p]);
    return dx;
  };

  double step = 1.0;
  for (int it = 0; it < config.per_column_steps; ++it) {
    // grad = 4 sum_j r_j (cand - xe_j), restricted to the free coordinates
    const Vector grad_full = 4.0 * (r.sum() * cand - Xe * r);
    Vector grad = Vector::Zero(d);
    for (Index p : free_coords) grad[p] = grad_full[p];
    if (grad.norm() == 0.0) break;

    bool accepted = false;
    double s = step;
    for (int h = 0; h <= 20; ++h) {
      const Vector dx_try = project(delta_X.col(column) - s * grad);
      const Vector cand_try = base + dx_try;
      const Vector r_try = residuals(cand_try);
      const double f_try = value_of(r_try);
      if (f_try <= f) {
        delta_X.col(column) = dx_try;
        cand = cand_try;
        r = r_try;
        const bool first_try = h == 0;
        f = f_try;
        step = first_try ? std::min(s * 2.0, 1e6) : s;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;  // no non-increasing move at 2^-20 of the step
  }
  return f;
}

ImputationResult run_stage2(const IncompleteDataset& ds, const Matrix& K_target,
                            const Stage2Config& config) {
  const Index n = ds.sample_count();
  const Index d = ds.feature_count();
  if (K_target.rows() != n || K_target.cols() != n)
    throw std::invalid_argument("run_stage2: kernel target shape mismatch");

  const Matrix log_target =
      stage2_log_target(K_target, config.gamma, config.kernel_floor);

  ImputationResult result;
  result.delta_X = Matrix::Zero(d, n);
  std::vector<Index> missing_columns;
  for (Index j = 0; j < n; ++j) {
    bool any = false;
    for (Index i = 0; i < d; ++i) {
      if (ds.mask(i, j) < 0.5) {
        result.delta_X(i, j) = 0.5;  // free coordinates start at 1/2
        any = true;
      }
    }
    if (any) missing_columns.push_back(j);
  }

  double obj = stage2_objective(ds, result.delta_X, K_target, config.gamma,
                                config.kernel_floor);
  result.objective_trace.push_back(obj);

  if (missing_columns.empty()) {
    result.converged = true;
  } else {
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      for (Index j : missing_columns)
        update_column(ds, result.delta_X, j, log_target, config);
      const double next = stage2_objective(ds, result.delta_X, K_target,
                                           config.gamma, config.kernel_floor);
      result.objective_trace.push_back(next);
      const double rel = (obj - next) / std::max(obj, 1e-300);
      obj = next;
      if (rel < config.obj_tol) {
        result.converged = true;
        break;
      }
    }
  }

  result.imputed = ds.features + result.delta_X;
  return result;
}

}  // namespace kimpute
