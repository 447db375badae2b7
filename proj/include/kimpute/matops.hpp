#pragma once

#include "kimpute/types.hpp"

namespace kimpute {

struct EigenPair {
  Matrix U;       // orthonormal eigenvector columns
  Vector lambda;  // eigenvalues, descending
};

// Full spectral decomposition of (A + A^T)/2.
EigenPair sym_eig(const Matrix& A);

// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero.
Matrix psd_project(const Matrix& A);

double min_eigenvalue(const Matrix& A);

struct ProjectionOptions {
  double kkt_tol = 1e-8;
  long max_dual_iters = -1;  // -1: 50*N^2
  int soft_iters = 2000;     // fallback budget when no warm start is given
  int soft_iters_warm = 600; // fallback budget with a warm start
  double soft_weight = 1e6;
  // Previous adjustment matrix; seeds the fallback solve across repeated
  // projections with slowly varying inputs.
  const Matrix* warm_start = nullptr;
};

struct ProjectionResult {
  Matrix K;
  bool used_fallback = false;       // eigenvalue QP infeasible, soft path taken
  double max_bound_violation = 0.0; // of K against [B_l, B_u]
  double min_eigenvalue = 0.0;      // of K
};

// Projection of hat_K onto {B_l <= K <= B_u, K PSD} through the eigenvalue
// parametrization K = U diag(d) U^T with U fixed from hat_K: solves
// min_d ||d - lambda||^2 subject to the bound constraints and d >= 0, which
// is the vec-space problem reduced through V V^T = I. Falls back to a soft
// penalty solve plus clamping and a PSD pass when that QP is infeasible.
ProjectionResult project_adjustment(const Matrix& hat_K, const Matrix& B_l,
                                    const Matrix& B_u,
                                    const ProjectionOptions& opts = {});

// V with columns v_{i,j} holding the entries (u_k u_k^T)_{i,j}, so that
// V vec(S) lists the coefficients u_k^T S u_k. Test support, small N only.
Matrix build_v_matrix(const Matrix& U);

// Builds V explicitly and checks ||V V^T - I||_F < 1e-8.
bool verify_vvt_identity(const Matrix& U);

}  // namespace kimpute
