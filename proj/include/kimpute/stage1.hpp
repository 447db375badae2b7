#pragma once

#include <vector>

#include "kimpute/kernels.hpp"
#include "kimpute/matops.hpp"
#include "kimpute/svm.hpp"

namespace kimpute {

struct Stage1Config {
  double C = 1.0;
  KernelSpec kernel;
  double eta = 1.0;  // pull-back weight on ||K_delta - 11^T||_F^2
  double rho = 1.0;  // perturbation penalty
  int max_iters = 200;
  double loss_tol = 1.5e-5;
  int alpha_steps_per_iter = 10;
  bool refit_alpha = true;  // re-optimize alpha on K_tilde after the loop
  int refit_blocks = 20;    // 10 steps each: 200 ascent steps total
  int qp_soft_iters = 2000;
  int qp_soft_iters_warm = 600;
};

struct Stage1Trace {
  std::vector<double> loss;
  std::vector<double> abs_dloss;
  std::vector<double> min_eig_E;
  std::vector<double> bound_violation_max;
  std::vector<double> kdelta_step_norm;  // ||K_d^(t) - K_d^(t-1)||_F
};

struct Stage1State {
  Matrix K_delta;
  Matrix E;
  Vector alpha;
  int iter = 0;  // 1-based outer iteration, drives the 1/t step schedule
};

struct Stage1Result {
  Matrix K_tilde;  // K_o o K_delta
  DualSolution dual;
  Stage1Trace trace;
  bool converged = false;
  bool qp_fallback_used = false;
  Matrix K_delta;
  Matrix E;
};

// hat_K = 11^T + 1/(4 eta) diag(a o y) (K_o o E) diag(a o y), then the
// feasible projection through the eigenvalue QP.
Matrix step1_update_kdelta(const Stage1State& state, const BoundedKernel& bk,
                           const Vector& y, const Stage1Config& config,
                           ProjectionResult* info = nullptr);

// E = P+(11^T - Gamma/(4 rho)), Gamma = diag(a o y) (K_o o K_delta) diag(a o y).
Matrix step2_update_e(const Stage1State& state, const BoundedKernel& bk,
                      const Vector& y, const Stage1Config& config);

// Projected dual ascent on K_o o K_delta o E with lr = 0.1*C / iter.
Vector step3_update_alpha(const Stage1State& state, const BoundedKernel& bk,
                          const Vector& y, const Stage1Config& config);

double stage1_loss(const Stage1State& state, const BoundedKernel& bk,
                   const Vector& y, const Stage1Config& config);

Stage1Result run_stage1(const BoundedKernel& bk, const Vector& y,
                        const Stage1Config& config);

Stage1Result run_stage1(const IncompleteDataset& ds, const Stage1Config& config);

}  // namespace kimpute
