#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "kimpute/dataset.hpp"
#include "kimpute/types.hpp"

namespace kimpute {

enum class KernelFamily { gaussian, linear, polynomial, laplacian, sigmoid, chi2 };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double gamma = 1.0;  // bandwidth / scale
  double offset = 0.0; // r term for polynomial and sigmoid
  int degree = 3;      // polynomial only
};

// Observed-part kernel matrix together with element-wise bounds on the
// multiplicative adjustment factor: the attainable kernel value over all
// completions of the missing coordinates in [0,1] is [K_o*B_l, K_o*B_u].
struct BoundedKernel {
  Matrix K_o;
  Matrix B_l;
  Matrix B_u;
  // False when some K_o entry is zero for a dot-product family, where a
  // multiplicative adjustment cannot represent the attainable range.
  bool stage1_compatible = true;
};

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& y);

BoundedKernel observed_kernel_with_bounds(const KernelSpec& spec,
                                          const IncompleteDataset& ds);

Matrix gram(const KernelSpec& spec, const Matrix& X);

Matrix cross_kernel(const KernelSpec& spec, const Matrix& train,
                    const Matrix& test);

// Empirical kernel range over uniformly sampled completions of the missing
// coordinates of a single pair; test oracle for the bound construction.
std::pair<double, double> attainable_range_oracle(
    const KernelSpec& spec, const Vector& x, const Vector& mask_x,
    const Vector& y, const Vector& mask_y, int n_samples, std::uint64_t seed);

}  // namespace kimpute
