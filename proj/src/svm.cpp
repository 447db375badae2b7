#include "kimpute/svm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kimpute {

namespace {

// diag(y) K diag(y) a without forming the conjugated matrix.
Vector conjugated_product(const Matrix& K, const Vector& y, const Vector& alpha) {
  return y.cwiseProduct(K * y.cwiseProduct(alpha));
}

}  // namespace

double dual_objective(const Vector& alpha, const Matrix& K, const Vector& y) {
  return alpha.sum() - 0.5 * alpha.dot(conjugated_product(K, y, alpha));
}

Vector dual_gradient(const Vector& alpha, const Matrix& K, const Vector& y) {
  return Vector::Ones(alpha.size()) - conjugated_product(K, y, alpha);
}

Vector project_alpha(const Vector& alpha_hat, const Vector& y, double C) {
  const Vector clipped = alpha_hat.cwiseMax(0.0).cwiseMin(C);
  const double shift = y.dot(clipped) / static_cast<double>(y.size());
  return clipped - shift * y;
}

Vector ascend_alpha(const Vector& alpha, const Matrix& K, const Vector& y,
                    double C, double learning_rate, int n_steps) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  Vector a = alpha;
  Vector m = Vector::Zero(a.size());
  Vector v = Vector::Zero(a.size());
  for (int t = 1; t <= n_steps; ++t) {
    const Vector g = dual_gradient(a, K, y);
    if (!g.allFinite()) throw std::runtime_error("ascend_alpha: non-finite gradient");
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const double mc = 1.0 - std::pow(beta1, t);
    const double vc = 1.0 - std::pow(beta2, t);
    a += learning_rate *
         (m / mc).cwiseQuotient(((v / vc).cwiseSqrt().array() + eps).matrix());
  }
  return project_alpha(a, y, C);
}

double recover_bias(const Vector& alpha, const Matrix& K, const Vector& y,
                    double C, bool* degenerate) {
  const Index n = alpha.size();
  const double tol = 1e-6 * C;
  if (degenerate != nullptr) *degenerate = false;

  const Vector scores = K * y.cwiseProduct(alpha);  // s_i = sum_j a_j y_j K_ij

  double sum = 0.0;
  Index margin_count = 0;
  bool any_sv = false;
  for (Index i = 0; i < n; ++i) {
    if (alpha[i] > tol) any_sv = true;
    if (alpha[i] > tol && alpha[i] < C - tol) {
      sum += y[i] - scores[i];
      ++margin_count;
    }
  }
  if (margin_count > 0) return sum / static_cast<double>(margin_count);

  if (any_sv) {
    // All support vectors sit at the C bound; bracket b by the KKT conditions
    // y_i (s_i + b) >= 1 for alpha_i = 0 and <= 1 for alpha_i = C.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      const double edge = y[i] > 0 ? 1.0 - scores[i] : -1.0 - scores[i];
      const bool at_zero = alpha[i] <= tol;
      if ((at_zero && y[i] > 0) || (!at_zero && y[i] < 0))
        lo = std::max(lo, edge);
      else
        hi = std::min(hi, edge);
    }
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
  }

  if (degenerate != nullptr) *degenerate = true;
  return 0.0;
}

Vector predict(const Vector& alpha, double bias, const Vector& y,
               const Matrix& cross_K) {
  if (cross_K.rows() != alpha.size())
    throw std::invalid_argument("predict: shape mismatch");
  const Vector scores = cross_K.transpose() * y.cwiseProduct(alpha);
  Vector out(scores.size());
  for (Index m = 0; m < scores.size(); ++m)
    out[m] = scores[m] + bias >= 0.0 ? 1.0 : -1.0;
  return out;
}

DualSolution train_dual(const Matrix& K, const Vector& y, double C, int blocks,
                        int steps_per_block) {
  const Index n = y.size();
  Vector alpha = Vector::Constant(n, C / 2.0);
  const double base = 0.1 * C;
  for (int t = 1; t <= blocks; ++t)
    alpha = ascend_alpha(alpha, K, y, C, base / t, steps_per_block);

  DualSolution sol;
  sol.alpha = alpha;
  sol.objective = dual_objective(alpha, K, y);
  sol.bias = recover_bias(alpha, K, y, C, &sol.bias_degenerate);
  const double tol = 1e-6 * C;
  for (Index i = 0; i < n; ++i)
    if (alpha[i] > tol) sol.support_indices.push_back(i);
  return sol;
}

}  // namespace kimpute
