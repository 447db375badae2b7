#include "kimpute/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace kimpute {

ErrorReport imputation_errors(const Matrix& imputed, const Matrix& ground_truth,
                              const Matrix& mask, const KernelSpec& kernel) {
  if (imputed.rows() != ground_truth.rows() ||
      imputed.cols() != ground_truth.cols() || imputed.rows() != mask.rows() ||
      imputed.cols() != mask.cols())
    throw std::invalid_argument("imputation_errors: shape mismatch");

  ErrorReport report;
  double sum = 0.0;
  Index count = 0;
  for (Index j = 0; j < imputed.cols(); ++j) {
    for (Index i = 0; i < imputed.rows(); ++i) {
      if (mask(i, j) < 0.5) {
        const double err = std::abs(imputed(i, j) - ground_truth(i, j));
        report.e_X_max = std::max(report.e_X_max, err);
        sum += err;
        ++count;
      }
    }
  }
  if (count > 0)
    report.e_X_mean = sum / static_cast<double>(count);
  else
    report.no_masked_positions = true;

  const Matrix diff = (gram(kernel, imputed) - gram(kernel, ground_truth)).cwiseAbs();
  if (diff.size() > 0) {
    report.e_K_max = diff.maxCoeff();
    report.e_K_mean = diff.mean();
  }
  return report;
}

namespace {

struct ClassStats {
  Vector mean_pos, mean_neg;
  std::vector<Index> pos, neg;
};

ClassStats class_stats(const Matrix& features, const Vector& labels) {
  if (features.cols() != labels.size())
    throw std::invalid_argument("features/labels size mismatch");
  ClassStats st;
  for (Index j = 0; j < labels.size(); ++j)
    (labels[j] > 0 ? st.pos : st.neg).push_back(j);
  if (st.pos.empty() || st.neg.empty())
    throw std::invalid_argument("both classes must be non-empty");
  st.mean_pos = Vector::Zero(features.rows());
  st.mean_neg = Vector::Zero(features.rows());
  for (Index j : st.pos) st.mean_pos += features.col(j);
  for (Index j : st.neg) st.mean_neg += features.col(j);
  st.mean_pos /= static_cast<double>(st.pos.size());
  st.mean_neg /= static_cast<double>(st.neg.size());
  return st;
}

}  // namespace

double icd(const Matrix& features, const Vector& labels) {
  const ClassStats st = class_stats(features, labels);
  return (st.mean_pos - st.mean_neg).norm();
}

double fdr(const Matrix& features, const Vector& labels) {
  const ClassStats st = class_stats(features, labels);
  const Index n = features.cols();
  Vector mean = Vector::Zero(features.rows());
  for (Index j = 0; j < n; ++j) mean += features.col(j);
  mean /= static_cast<double>(n);

  const double trace_sb =
      static_cast<double>(st.pos.size()) * (st.mean_pos - mean).squaredNorm() +
      static_cast<double>(st.neg.size()) * (st.mean_neg - mean).squaredNorm();
  double trace_sw = 0.0;
  for (Index j : st.pos) trace_sw += (features.col(j) - st.mean_pos).squaredNorm();
  for (Index j : st.neg) trace_sw += (features.col(j) - st.mean_neg).squaredNorm();
  if (trace_sw == 0.0)
    throw std::runtime_error("fdr: degenerate within-class scatter");
  return trace_sb / trace_sw;
}

double chi(const Matrix& features, const Vector& labels) {
  const double n = static_cast<double>(features.cols());
  return fdr(features, labels) * (n - 2.0);  // (N-k)/(k-1) with k = 2
}

double dbi(const Matrix& features, const Vector& labels) {
  const ClassStats st = class_stats(features, labels);
  const double dist = (st.mean_pos - st.mean_neg).norm();
  if (dist == 0.0) throw std::runtime_error("dbi: coincident centroids");
  double sigma_pos = 0.0, sigma_neg = 0.0;
  for (Index j : st.pos) sigma_pos += (features.col(j) - st.mean_pos).norm();
  for (Index j : st.neg) sigma_neg += (features.col(j) - st.mean_neg).norm();
  sigma_pos /= static_cast<double>(st.pos.size());
  sigma_neg /= static_cast<double>(st.neg.size());
  // k = 2: the max over the other cluster is the other cluster.
  return (sigma_pos + sigma_neg) / dist;
}

SeparabilityReport separability(const Matrix& features, const Vector& labels) {
  SeparabilityReport r;
  r.icd = icd(features, labels);
  r.fdr = fdr(features, labels);
  r.chi = chi(features, labels);
  r.dbi = dbi(features, labels);
  return r;
}

double accuracy(const Vector& predicted, const Vector& actual) {
  if (predicted.size() != actual.size() || predicted.size() == 0)
    throw std::invalid_argument("accuracy: length mismatch or empty input");
  Index hits = 0;
  for (Index i = 0; i < predicted.size(); ++i)
    if (predicted[i] == actual[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::vector<Matrix> pca_project(const Matrix& reference,
                                const std::vector<Matrix>& targets) {
  const Index d = reference.rows();
  const Index n = reference.cols();
  if (d < 2) throw std::invalid_argument("pca_project: need d >= 2");
  if (n < 2) throw std::invalid_argument("pca_project: need at least 2 samples");

  const Vector mean = reference.rowwise().mean();
  const Matrix centered = reference.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pca_project: eigendecomposition failed");
  const double lead = es.eigenvalues()[d - 1];
  if (es.eigenvalues()[d - 2] <= 1e-12 * std::max(lead, 1.0))
    throw std::runtime_error("pca_project: covariance rank below 2");

  Matrix W(2, d);
  W.row(0) = es.eigenvectors().col(d - 1).transpose();
  W.row(1) = es.eigenvectors().col(d - 2).transpose();

  std::vector<Matrix> out;
  out.reserve(targets.size());
  for (const Matrix& t : targets) {
    if (t.rows() != d)
      throw std::invalid_argument("pca_project: target dimension mismatch");
    out.push_back(W * (t.colwise() - mean));
  }
  return out;
}

}  // namespace kimpute
