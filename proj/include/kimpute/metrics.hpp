#pragma once

#include <vector>

#include "kimpute/kernels.hpp"
#include "kimpute/types.hpp"

namespace kimpute {

struct ErrorReport {
  double e_X_max = 0.0;
  double e_X_mean = 0.0;
  double e_K_max = 0.0;
  double e_K_mean = 0.0;
  bool no_masked_positions = false;
};

// e_X over absolute errors at masked positions; e_K over entrywise absolute
// differences between the Gram matrices of imputed and ground truth.
ErrorReport imputation_errors(const Matrix& imputed, const Matrix& ground_truth,
                              const Matrix& mask, const KernelSpec& kernel);

struct SeparabilityReport {
  double icd = 0.0;
  double fdr = 0.0;
  double chi = 0.0;
  double dbi = 0.0;
};

double icd(const Matrix& features, const Vector& labels);
double fdr(const Matrix& features, const Vector& labels);
double chi(const Matrix& features, const Vector& labels);
double dbi(const Matrix& features, const Vector& labels);
SeparabilityReport separability(const Matrix& features, const Vector& labels);

double accuracy(const Vector& predicted, const Vector& actual);

// Projects every target through the top-2 principal directions of the
// reference; emits 2 x N coordinate sets for external plotting.
std::vector<Matrix> pca_project(const Matrix& reference,
                                const std::vector<Matrix>& targets);

}  // namespace kimpute
