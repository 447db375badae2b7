#include "kimpute/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "kimpute/rng.hpp"

namespace kimpute {

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "linear") return KernelFamily::linear;
  if (name == "polynomial") return KernelFamily::polynomial;
  if (name == "laplacian") return KernelFamily::laplacian;
  if (name == "sigmoid") return KernelFamily::sigmoid;
  if (name == "chi2") return KernelFamily::chi2;
  throw std::invalid_argument("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::linear: return "linear";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::laplacian: return "laplacian";
    case KernelFamily::sigmoid: return "sigmoid";
    case KernelFamily::chi2: return "chi2";
  }
  return "unknown";
}

namespace {

bool is_distance_family(KernelFamily f) {
  return f == KernelFamily::gaussian || f == KernelFamily::laplacian;
}

// x_p vs y_p contribution to the decoupled inner sum.
double pair_term(const KernelSpec& spec, double a, double b) {
  switch (spec.family) {
    case KernelFamily::gaussian: {
      const double t = a - b;
      return t * t;
    }
    case KernelFamily::laplacian:
      return std::abs(a - b);
    case KernelFamily::linear:
    case KernelFamily::polynomial:
    case KernelFamily::sigmoid:
      return a * b;
    case KernelFamily::chi2: {
      const double s = a + b;
      return s > 0.0 ? 2.0 * a * b / s : 0.0;  // 0/0 -> 0
    }
  }
  return 0.0;
}

// Largest contribution of a coordinate observed at value a on one side and
// missing on the other (the smallest is always 0 for data in [0,1]).
double half_missing_max(const KernelSpec& spec, double a) {
  switch (spec.family) {
    case KernelFamily::gaussian:
      return std::max(a * a, (1.0 - a) * (1.0 - a));
    case KernelFamily::laplacian:
      return std::max(a, 1.0 - a);
    case KernelFamily::linear:
    case KernelFamily::polynomial:
    case KernelFamily::sigmoid:
      return a;
    case KernelFamily::chi2:
      return a > 0.0 ? 2.0 * a / (a + 1.0) : 0.0;
  }
  return 0.0;
}

// Outer function over the accumulated inner sum.
double outer(const KernelSpec& spec, double sum) {
  switch (spec.family) {
    case KernelFamily::gaussian:
    case KernelFamily::laplacian:
      return std::exp(-spec.gamma * sum);
    case KernelFamily::linear:
    case KernelFamily::chi2:
      return sum;
    case KernelFamily::polynomial:
      return std::pow(sum + spec.offset, spec.degree);
    case KernelFamily::sigmoid:
      return std::tanh(spec.gamma * sum + spec.offset);
  }
  return 0.0;
}

void validate(const KernelSpec& spec) {
  const bool uses_gamma = spec.family == KernelFamily::gaussian ||
                          spec.family == KernelFamily::laplacian ||
                          spec.family == KernelFamily::sigmoid;
  if (uses_gamma && spec.gamma <= 0.0)
    throw std::invalid_argument("kernel gamma must be positive");
  if (spec.family == KernelFamily::polynomial && spec.degree < 1)
    throw std::invalid_argument("polynomial degree must be >= 1");
  if ((spec.family == KernelFamily::polynomial ||
       spec.family == KernelFamily::sigmoid) &&
      spec.offset < 0.0)
    throw std::invalid_argument("kernel offset must be nonnegative");
}

}  // namespace

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& y) {
  validate(spec);
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_value: dimension mismatch");
  double sum = 0.0;
  for (Index p = 0; p < x.size(); ++p) sum += pair_term(spec, x[p], y[p]);
  return outer(spec, sum);
}

BoundedKernel observed_kernel_with_bounds(const KernelSpec& spec,
                                          const IncompleteDataset& ds) {
  validate(spec);
  const Index n = ds.sample_count();
  const Index d = ds.feature_count();
  BoundedKernel bk;
  bk.K_o = Matrix::Zero(n, n);
  bk.B_l = Matrix::Ones(n, n);
  bk.B_u = Matrix::Ones(n, n);
  const bool distance = is_distance_family(spec.family);

  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      double obs = 0.0;      // inner sum over coordinates observed in both
      double unknown = 0.0;  // largest attainable contribution of the rest
      if (i == j && distance) {
        // A sample's missing coordinates cancel against itself.
        bk.K_o(i, i) = 1.0;
        continue;
      }
      for (Index p = 0; p < d; ++p) {
        const bool oi = ds.mask(p, i) > 0.5;
        const bool oj = ds.mask(p, j) > 0.5;
        if (oi && oj)
          obs += pair_term(spec, ds.features(p, i), ds.features(p, j));
        else if (oi)
          unknown += half_missing_max(spec, ds.features(p, i));
        else if (oj)
          unknown += half_missing_max(spec, ds.features(p, j));
        else
          unknown += 1.0;  // both missing, free in [0,1]
      }
      const double k_o = outer(spec, obs);
      bk.K_o(i, j) = bk.K_o(j, i) = k_o;
      if (unknown == 0.0) continue;  // fully determined entry: B_l = B_u = 1
      if (distance) {
        const double bl = std::exp(-spec.gamma * unknown);
        bk.B_l(i, j) = bk.B_l(j, i) = bl;
      } else {
        const double k_max = outer(spec, obs + unknown);
        if (k_o > 0.0) {
          const double bu = k_max / k_o;
          bk.B_u(i, j) = bk.B_u(j, i) = bu;
        } else {
          // A zero observed part cannot carry the range multiplicatively.
          bk.stage1_compatible = false;
        }
      }
    }
  }
  return bk;
}

Matrix gram(const KernelSpec& spec, const Matrix& X) {
  const Index n = X.cols();
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = kernel_value(spec, X.col(i), X.col(j));
      K(i, j) = K(j, i) = v;
    }
  }
  return K;
}

Matrix cross_kernel(const KernelSpec& spec, const Matrix& train,
                    const Matrix& test) {
  if (train.rows() != test.rows() && test.cols() > 0 && train.cols() > 0)
    throw std::invalid_argument("cross_kernel: dimension mismatch");
  Matrix K(train.cols(), test.cols());
  for (Index i = 0; i < train.cols(); ++i)
    for (Index m = 0; m < test.cols(); ++m)
      K(i, m) = kernel_value(spec, train.col(i), test.col(m));
  return K;
}

std::pair<double, double> attainable_range_oracle(
    const KernelSpec& spec, const Vector& x, const Vector& mask_x,
    const Vector& y, const Vector& mask_y, int n_samples, std::uint64_t seed) {
  const Index d = x.size();
  std::vector<Index> free_x, free_y;
  for (Index p = 0; p < d; ++p) {
    if (mask_x[p] < 0.5) free_x.push_back(p);
    if (mask_y[p] < 0.5) free_y.push_back(p);
  }
  if (free_x.empty() && free_y.empty()) {
    const double k = kernel_value(spec, x, y);
    return {k, k};
  }

  Rng rng(seed);
  Vector xc = x, yc = y;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    for (Index p : free_x) xc[p] = uniform01(rng);
    for (Index p : free_y) yc[p] = uniform01(rng);
    const double k = kernel_value(spec, xc, yc);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  return {lo, hi};
}

}  // namespace kimpute
