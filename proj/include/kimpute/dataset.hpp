#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "kimpute/types.hpp"

namespace kimpute {

// Column-per-sample layout: features and mask are d x N, labels has length N.
// Entries with mask == 0 are missing and hold the value 0 in features.
struct IncompleteDataset {
  Matrix features;
  Matrix mask;    // 1 = observed, 0 = missing
  Vector labels;  // entries in {-1, +1}

  Index feature_count() const { return features.rows(); }
  Index sample_count() const { return features.cols(); }

  double missing_ratio() const;
  bool fully_observed() const;
};

struct SplitSpec {
  double train_fraction = 0.4;
  double holdout_fraction = 0.3;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

struct SyntheticSpec {
  int n_per_class = 200;
  int dim = 30;
  double noise_intensity = 0.2;
  double outlier_fraction = 0.1;
  double non_uniformity = 0.5;
  std::uint64_t seed = 0;
};

struct ScalingParams {
  Vector feature_min;
  Vector feature_max;
};

// libsvm text format: "label idx:val idx:val ..." with 1-based indices.
// Absent indices are observed zeros, not missing values.
IncompleteDataset load_libsvm(const std::string& path);

// CSV with a header row; a column named "label" carries the class, every
// other column is a feature, and the literal token NA marks a missing cell.
IncompleteDataset load_csv(const std::string& path);

std::pair<IncompleteDataset, ScalingParams> scale_min_max(
    const IncompleteDataset& ds);

// Applies a previously fitted scaler; out-of-range results are clamped into
// [0,1] when clamp is set (used for holdout/test scaled with train params).
IncompleteDataset apply_scaling(const IncompleteDataset& ds,
                                const ScalingParams& params, bool clamp);

Matrix unscale(const Matrix& features, const ScalingParams& params);

IncompleteDataset apply_mcar(const IncompleteDataset& ds, double missing_ratio,
                             std::uint64_t seed);

struct SplitResult {
  IncompleteDataset train;
  IncompleteDataset holdout;
  IncompleteDataset test;
};

SplitResult split(const IncompleteDataset& ds, const SplitSpec& spec);

IncompleteDataset generate_synthetic(const SyntheticSpec& spec);

Matrix mean_impute(const IncompleteDataset& ds);

}  // namespace kimpute
