#pragma once

#include <vector>

#include "kimpute/dataset.hpp"
#include "kimpute/types.hpp"

namespace kimpute {

struct Stage2Config {
  double gamma = 1.0;  // Gaussian bandwidth; must match the target kernel's
  int max_sweeps = 100;
  int per_column_steps = 50;
  double obj_tol = 1e-8;       // relative sweep-to-sweep decrease
  double kernel_floor = 1e-12; // clamp before the log
};

struct ImputationResult {
  Matrix delta_X;  // d x N correction, zero at observed positions
  Matrix imputed;  // X_o + delta_X, all entries in [0,1]
  std::vector<double> objective_trace;  // per sweep, non-increasing
  bool converged = false;
};

// (1/gamma) ln(max(K, floor)) entrywise.
Matrix stage2_log_target(const Matrix& K_target, double gamma,
                         double kernel_floor = 1e-12);

// 2 * sum_{i<j} [ ||x_i - x_j + dx_i - dx_j||^2 + (1/gamma) ln K_ij ]^2
// with zero-filled observed vectors; the diagonal is excluded.
double stage2_objective(const IncompleteDataset& ds, const Matrix& delta_X,
                        const Matrix& K_target, double gamma,
                        double kernel_floor = 1e-12);

// Projected gradient descent with backtracking on one correction column;
// observed coordinates stay 0 and free coordinates keep x + dx in [0,1].
// log_target is stage2_log_target of the kernel target. Returns the column
// objective sum_{j != i} r_ij^2 after the update.
double update_column(const IncompleteDataset& ds, Matrix& delta_X, Index column,
                     const Matrix& log_target, const Stage2Config& config);

ImputationResult run_stage2(const IncompleteDataset& ds, const Matrix& K_target,
                            const Stage2Config& config);

}  // namespace kimpute
