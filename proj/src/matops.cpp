#include "kimpute/matops.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kimpute {

EigenPair sym_eig(const Matrix& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("sym_eig: matrix must be square");
  if (!A.allFinite())
    throw std::invalid_argument("sym_eig: non-finite entries");
  const Matrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eig: eigendecomposition failed");
  const Index n = A.rows();
  EigenPair out;
  out.U.resize(n, n);
  out.lambda.resize(n);
  for (Index k = 0; k < n; ++k) {  // Eigen sorts ascending; flip to descending
    out.lambda[k] = es.eigenvalues()[n - 1 - k];
    out.U.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

Matrix psd_project(const Matrix& A) {
  const EigenPair ep = sym_eig(A);
  const Index n = A.rows();
  if (n == 0) return A;
  if (ep.lambda[n - 1] >= 0.0) return 0.5 * (A + A.transpose());
  const Vector lam = ep.lambda.cwiseMax(0.0);
  Matrix R = ep.U * lam.asDiagonal() * ep.U.transpose();
  return 0.5 * (R + R.transpose());
}

double min_eigenvalue(const Matrix& A) {
  const Matrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("min_eigenvalue: eigendecomposition failed");
  return A.rows() > 0 ? es.eigenvalues()[0] : 0.0;
}

namespace {

Matrix mat_of(const Matrix& U, const Vector& d) {
  Matrix M = U * d.asDiagonal() * U.transpose();
  return 0.5 * (M + M.transpose());
}

// diag(U^T S U): coefficients of S against the basis u_k u_k^T.
Vector subspace_coeffs(const Matrix& U, const Matrix& S) {
  const Matrix SU = S * U;
  Vector d(U.cols());
  for (Index k = 0; k < U.cols(); ++k) d[k] = U.col(k).dot(SU.col(k));
  return d;
}

double max_bound_violation(const Matrix& K, const Matrix& B_l,
                           const Matrix& B_u) {
  if (K.size() == 0) return 0.0;
  const double over = (K - B_u).maxCoeff();
  const double under = (B_l - K).maxCoeff();
  return std::max({over, under, 0.0});
}

struct DualOutcome {
  Vector d;
  bool converged = false;
};

// FISTA on the dual of  min ||d - lambda||^2  s.t. vec(B_l) <= V^T d <=
// vec(B_u), d >= 0.  V V^T = I makes the dual gradient 1/3-Lipschitz
// exactly, so the step is 1/3. Diverges when the primal is infeasible;
// callers treat non-convergence as infeasibility.
DualOutcome solve_dual(const Matrix& U, const Vector& lambda,
                       const Matrix& B_l, const Matrix& B_u, double kkt_tol,
                       long max_iters) {
  const Index n = lambda.size();
  const double step = 1.0 / 3.0;
  const double bscale =
      std::max({1.0, B_l.cwiseAbs().maxCoeff(), B_u.cwiseAbs().maxCoeff()});

  Matrix mu_u = Matrix::Zero(n, n), mu_l = Matrix::Zero(n, n);
  Vector mu_d = Vector::Zero(n);
  Matrix mu_u_prev = mu_u, mu_l_prev = mu_l;
  Vector mu_d_prev = mu_d;
  double t_prev = 1.0;

  auto primal_of = [&](const Matrix& mu, const Matrix& ml, const Vector& md) {
    return (lambda - subspace_coeffs(U, mu - ml) + md).eval();
  };

  const int check_every = 25;
  double best_feas = std::numeric_limits<double>::infinity();
  long stalled = 0;

  for (long it = 0; it < max_iters; ++it) {
    const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    const double beta = (t_prev - 1.0) / t;
    const Matrix y_u = mu_u + beta * (mu_u - mu_u_prev);
    const Matrix y_l = mu_l + beta * (mu_l - mu_l_prev);
    const Vector y_d = mu_d + beta * (mu_d - mu_d_prev);

    const Vector d = primal_of(y_u, y_l, y_d);
    const Matrix K = mat_of(U, d);

    mu_u_prev = mu_u;
    mu_l_prev = mu_l;
    mu_d_prev = mu_d;
    mu_u = (y_u + step * (K - B_u)).cwiseMax(0.0);
    mu_l = (y_l + step * (B_l - K)).cwiseMax(0.0);
    mu_d = (y_d - step * d).cwiseMax(0.0);

    // Gradient-based adaptive restart.
    const double cross = (B_u - K).cwiseProduct(mu_u - mu_u_prev).sum() +
                         (K - B_l).cwiseProduct(mu_l - mu_l_prev).sum() +
                         d.cwiseProduct(mu_d - mu_d_prev).sum();
    t_prev = cross > 0.0 ? 1.0 : t;

    if ((it + 1) % check_every == 0 || it + 1 == max_iters) {
      const Vector dc = primal_of(mu_u, mu_l, mu_d);
      const Matrix Kc = mat_of(U, dc);
      const double feas = std::max(max_bound_violation(Kc, B_l, B_u),
                                   std::max(-dc.minCoeff(), 0.0));
      const double mu_max = std::max(
          {mu_u.maxCoeff(), mu_l.maxCoeff(), mu_d.maxCoeff(), 0.0});
      const double comp =
          std::max({(mu_u.cwiseProduct(Kc - B_u)).cwiseAbs().maxCoeff(),
                    (mu_l.cwiseProduct(B_l - Kc)).cwiseAbs().maxCoeff(),
                    (mu_d.cwiseProduct(dc)).cwiseAbs().maxCoeff()});
      if (feas <= kkt_tol * bscale && comp <= kkt_tol * std::max(1.0, mu_max))
        return {dc, true};
      if (feas < 0.99 * best_feas) {
        best_feas = feas;
        stalled = 0;
      } else {
        stalled += check_every;
        if (stalled >= 3000) break;  // infeasible in practice
      }
    }
  }
  return {primal_of(mu_u, mu_l, mu_d), false};
}

// Accelerated gradient descent on the soft penalty
//   phi(d) = ||d - lambda||^2 + w ( ||(Mat(d)-B_u)+||_F^2
//          + ||(B_l-Mat(d))+||_F^2 + ||(-d)+||^2 ),
// strongly convex with modulus 2 and gradient Lipschitz constant 2 + 6w.
Vector solve_soft(const Matrix& U, const Vector& lambda, const Matrix& B_l,
                  const Matrix& B_u, double w, const Vector& d0,
                  int max_iters) {
  const double L = 2.0 + 6.0 * w;
  const double sq = std::sqrt(2.0 / L);
  const double beta = (1.0 - sq) / (1.0 + sq);
  const double step = 1.0 / L;

  Vector d = d0, d_prev = d0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector y = d + beta * (d - d_prev);
    const Matrix K = mat_of(U, y);
    const Matrix over = (K - B_u).cwiseMax(0.0);
    const Matrix under = (B_l - K).cwiseMax(0.0);
    Vector grad = 2.0 * (y - lambda);
    grad += 2.0 * w * subspace_coeffs(U, over - under);
    grad -= 2.0 * w * (-y).cwiseMax(0.0);

    d_prev = d;
    d = y - step * grad;
    if ((d - d_prev).cwiseAbs().maxCoeff() <
        1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff()))
      break;
  }
  return d;
}

// Dykstra's alternating projections between the box [B_l, B_u] and the PSD
// cone. Round one (zero corrections) is exactly "clamp, then one PSD pass";
// later rounds run only until the returned matrix meets the feasibility
// contract. The result is PSD by construction (PSD step last).
Matrix dykstra_box_psd(const Matrix& Z0, const Matrix& B_l, const Matrix& B_u,
                       double tol, int max_rounds) {
  const Index n = Z0.rows();
  Matrix Z = Z0;
  Matrix p = Matrix::Zero(n, n), q = Matrix::Zero(n, n);
  for (int round = 0; round < max_rounds; ++round) {
    const Matrix yb = (Z + p).cwiseMax(B_l).cwiseMin(B_u);
    p = Z + p - yb;
    const Matrix zn = psd_project(yb + q);
    q = yb + q - zn;
    Z = zn;
    if (max_bound_violation(Z, B_l, B_u) <= tol) break;
  }
  return Z;
}

}  // namespace

ProjectionResult project_adjustment(const Matrix& hat_K, const Matrix& B_l,
                                    const Matrix& B_u,
                                    const ProjectionOptions& opts) {
  const Index n = hat_K.rows();
  if (hat_K.cols() != n || B_l.rows() != n || B_l.cols() != n ||
      B_u.rows() != n || B_u.cols() != n)
    throw std::invalid_argument("project_adjustment: shape mismatch");
  if (n > 0 && (B_u - B_l).minCoeff() < -1e-12)
    throw std::invalid_argument("project_adjustment: B_l must not exceed B_u");

  auto finish = [&](Matrix K, bool fallback) {
    ProjectionResult r;
    r.used_fallback = fallback;
    r.max_bound_violation = max_bound_violation(K, B_l, B_u);
    r.min_eigenvalue = n > 0 ? min_eigenvalue(K) : 0.0;
    r.K = std::move(K);
    return r;
  };

  if (n == 0) return finish(hat_K, false);

  const Matrix H = 0.5 * (hat_K + hat_K.transpose());
  const EigenPair ep = sym_eig(H);

  // Already feasible: keep hat_K itself.
  if (ep.lambda[n - 1] >= -1e-12 && max_bound_violation(H, B_l, B_u) <= 1e-12)
    return finish(H, false);

  // Entries with B_l == B_u pin linear equalities on d. When they determine
  // d completely, the single candidate decides feasibility outright.
  bool infeasible = false;
  {
    std::vector<std::pair<Index, Index>> pinned;
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j)
        if (B_u(i, j) - B_l(i, j) <= 1e-12) pinned.emplace_back(i, j);

    if (!pinned.empty()) {
      Matrix P(static_cast<Index>(pinned.size()), n);
      Vector c(static_cast<Index>(pinned.size()));
      for (size_t r = 0; r < pinned.size(); ++r) {
        const auto [i, j] = pinned[r];
        P.row(static_cast<Index>(r)) =
            ep.U.row(i).cwiseProduct(ep.U.row(j));
        c[static_cast<Index>(r)] = 0.5 * (B_l(i, j) + B_u(i, j));
      }
      Eigen::ColPivHouseholderQR<Matrix> qr(P);
      qr.setThreshold(1e-10);
      if (qr.rank() == n) {
        const Vector d0 = qr.solve(c);
        if (d0.minCoeff() >= -1e-8) {
          const Matrix K0 = mat_of(ep.U, d0.cwiseMax(0.0));
          if (max_bound_violation(K0, B_l, B_u) <= 1e-8)
            return finish(K0, false);
        }
        infeasible = true;  // unique candidate violates a constraint
      }
    }
  }

  if (!infeasible) {
    const long cap =
        opts.max_dual_iters > 0 ? opts.max_dual_iters : 50L * n * n;
    const DualOutcome dual =
        solve_dual(ep.U, ep.lambda, B_l, B_u, opts.kkt_tol, cap);
    if (dual.converged) return finish(mat_of(ep.U, dual.d.cwiseMax(0.0)), false);
  }

  // Fallback: soft penalty solve, clamp into the box, PSD pass; extra
  // Dykstra rounds only when a single pass leaves the contract unmet.
  Vector d_init = ep.lambda.cwiseMax(0.0);
  int budget = opts.soft_iters;
  if (opts.warm_start != nullptr && opts.warm_start->rows() == n) {
    d_init = subspace_coeffs(ep.U, *opts.warm_start).cwiseMax(0.0);
    budget = opts.soft_iters_warm;
  }
  const Vector ds = solve_soft(ep.U, ep.lambda, B_l, B_u, opts.soft_weight,
                               d_init, budget);
  const Matrix Z = mat_of(ep.U, ds.cwiseMax(0.0));
  return finish(dykstra_box_psd(Z, B_l, B_u, 1e-7, 200), true);
}

Matrix build_v_matrix(const Matrix& U) {
  const Index n = U.rows();
  Matrix V(n, n * n);
  for (Index k = 0; k < n; ++k) {
    const Matrix outer = U.col(k) * U.col(k).transpose();
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) V(k, i + j * n) = outer(i, j);
  }
  return V;
}

bool verify_vvt_identity(const Matrix& U) {
  const Matrix V = build_v_matrix(U);
  const Index n = U.rows();
  const Matrix gram = V * V.transpose();
  return (gram - Matrix::Identity(n, n)).norm() < 1e-8;
}

}  // namespace kimpute
