#pragma once

#include <vector>

#include "kimpute/types.hpp"

namespace kimpute {

struct DualSolution {
  Vector alpha;
  double bias = 0.0;
  double objective = 0.0;
  std::vector<Index> support_indices;  // alpha_i > 1e-6 * C
  bool bias_degenerate = false;        // no support vectors, bias fell back to 0
};

// 1^T a - 1/2 a^T diag(y) K diag(y) a
double dual_objective(const Vector& alpha, const Matrix& K, const Vector& y);

// 1 - diag(y) K diag(y) a
Vector dual_gradient(const Vector& alpha, const Matrix& K, const Vector& y);

// Clip to [0, C], then subtract (y^T a / N) y. The second step restores
// y^T a = 0 exactly but can leave entries outside [0, C] by up to |y^T a|/N;
// no re-clip by construction.
Vector project_alpha(const Vector& alpha_hat, const Vector& y, double C);

// n_steps of adaptive-moment gradient ascent on the dual objective at a fixed
// learning rate, then one projection. Moment accumulators are local to the call.
Vector ascend_alpha(const Vector& alpha, const Matrix& K, const Vector& y,
                    double C, double learning_rate, int n_steps);

double recover_bias(const Vector& alpha, const Matrix& K, const Vector& y,
                    double C, bool* degenerate = nullptr);

// sign(sum_i a_i y_i cross_K(i, m) + b) with sign(0) = +1.
Vector predict(const Vector& alpha, double bias, const Vector& y,
               const Matrix& cross_K);

// Projected dual ascent from alpha = C/2: `blocks` rounds of ascend_alpha
// with the diminishing schedule lr = 0.1*C / t.
DualSolution train_dual(const Matrix& K, const Vector& y, double C,
                        int blocks = 20, int steps_per_block = 10);

}  // namespace kimpute
