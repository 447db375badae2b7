#pragma once

#include <cstdint>
#include <vector>

#include "kimpute/dataset.hpp"
#include "kimpute/metrics.hpp"
#include "kimpute/stage1.hpp"
#include "kimpute/stage2.hpp"
#include "kimpute/svm.hpp"

namespace kimpute {

struct TwoStageOptions {
  Stage1Config stage1;  // C, kernel, eta, rho already resolved
  Stage2Config stage2;
  int subsets = 1;  // > 1: impute column chunks independently, concatenate
};

struct TwoStageOutput {
  Matrix imputed;
  Matrix K_tilde;  // subsets == 1 only
  DualSolution classifier;
  Stage1Trace stage1_trace;  // first chunk when subsets > 1
  std::vector<double> stage2_trace;
  bool stage1_converged = false;
  bool stage2_converged = false;
  bool qp_fallback_used = false;
};

// Stage I then Stage II on an already scaled training set. The classifier is
// refit on K_tilde per the stage-1 config; with subsets > 1 it is trained on
// the Gram matrix of the concatenated imputed data instead.
TwoStageOutput run_two_stage(const IncompleteDataset& train_scaled,
                             const TwoStageOptions& opts);

struct GridSpec {
  std::vector<double> C_values;
  std::vector<double> gamma_values;
};

GridSpec default_mi_grid();  // C, gamma in {2^-5, ..., 2^5}

struct EvaluateConfig {
  SplitSpec split;  // fractions only; per-repeat seeds derive from master_seed
  double missing_ratio = 0.6;
  KernelFamily family = KernelFamily::gaussian;
  GridSpec mi_grid;
  int repeats = 10;
  std::uint64_t master_seed = 0;
  Stage1Config stage1;  // eta/rho overwritten per repeat unless pinned
  Stage2Config stage2;
  int subsets = 1;
  int threads = 2;
  bool pin_eta = false;  // keep stage1.eta instead of ||alpha_MI||_2
  bool pin_rho = false;  // keep stage1.rho instead of 5C/m
};

struct RepeatOutcome {
  std::uint64_t seed = 0;
  double C_mi = 0, gamma_mi = 0, acc_mi = 0, holdout_acc_mi = 0;
  double C_ts = 0, gamma_ts = 0, acc_ts = 0, holdout_acc_ts = 0;
  double eta = 0, rho = 0;
  SeparabilityReport sep_mi, sep_ts;
  bool stage1_converged = false;
  bool qp_fallback_used = false;
};

struct MethodSummary {
  double mean_acc = 0;
  double std_acc = 0;  // sample std; 0 when repeats == 1
  SeparabilityReport mean_sep;
};

struct EvaluateResult {
  std::vector<RepeatOutcome> repeats;
  MethodSummary mi;
  MethodSummary two_stage;
};

// The full comparison protocol: split 4:3:3, MCAR on train, MI grid search on
// the holdout, refinement grid {.2^-1, 2^0, 2^1} for the two-stage method,
// eta = ||alpha_MI||_2 and rho = 5C/m, test accuracy for both methods.
EvaluateResult evaluate(const IncompleteDataset& complete,
                        const EvaluateConfig& config);

struct KernelRecoverConfig {
  KernelSpec kernel;
  double missing_ratio = 0.1;
  std::uint64_t seed = 0;
  Stage2Config stage2;
};

struct KernelRecoverResult {
  ErrorReport errors;
  ImputationResult imputation;
  IncompleteDataset masked;  // scaled, with the MCAR mask applied
  Matrix ground_truth;       // scaled complete features
};

// Stage II alone against the exact Gram matrix of the complete data.
KernelRecoverResult kernel_recover(const IncompleteDataset& complete,
                                   const KernelRecoverConfig& config);

}  // namespace kimpute
