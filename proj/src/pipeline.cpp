#include "kimpute/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <vector>

#include "kimpute/rng.hpp"

namespace kimpute {

GridSpec default_mi_grid() {
  GridSpec g;
  for (int e = -5; e <= 5; ++e) {
    g.C_values.push_back(std::pow(2.0, e));
    g.gamma_values.push_back(std::pow(2.0, e));
  }
  return g;
}

namespace {

std::vector<std::pair<Index, Index>> chunk_ranges(Index n, int k) {
  std::vector<std::pair<Index, Index>> out;
  const Index base = n / k;
  const Index extra = n % k;
  Index begin = 0;
  for (int c = 0; c < k; ++c) {
    const Index len = base + (c < extra ? 1 : 0);
    out.emplace_back(begin, len);
    begin += len;
  }
  return out;
}

IncompleteDataset slice_columns(const IncompleteDataset& ds, Index begin,
                                Index count) {
  IncompleteDataset out;
  out.features = ds.features.middleCols(begin, count);
  out.mask = ds.mask.middleCols(begin, count);
  out.labels = ds.labels.segment(begin, count);
  return out;
}

}  // namespace

TwoStageOutput run_two_stage(const IncompleteDataset& train_scaled,
                             const TwoStageOptions& opts) {
  TwoStageOutput out;
  if (opts.subsets <= 1) {
    Stage1Result s1 = run_stage1(train_scaled, opts.stage1);
    ImputationResult s2 = run_stage2(train_scaled, s1.K_tilde, opts.stage2);
    out.imputed = s2.imputed;
    out.K_tilde = std::move(s1.K_tilde);
    out.classifier = std::move(s1.dual);
    out.stage1_trace = std::move(s1.trace);
    out.stage2_trace = std::move(s2.objective_trace);
    out.stage1_converged = s1.converged;
    out.stage2_converged = s2.converged;
    out.qp_fallback_used = s1.qp_fallback_used;
    return out;
  }

  const Index n = train_scaled.sample_count();
  if (opts.subsets > n)
    throw std::invalid_argument("more subsets than training samples");
  out.imputed = Matrix::Zero(train_scaled.feature_count(), n);
  out.stage1_converged = true;
  out.stage2_converged = true;
  bool first = true;
  for (const auto& [begin, count] : chunk_ranges(n, opts.subsets)) {
    const IncompleteDataset chunk = slice_columns(train_scaled, begin, count);
    Stage1Result s1 = run_stage1(chunk, opts.stage1);
    ImputationResult s2 = run_stage2(chunk, s1.K_tilde, opts.stage2);
    out.imputed.middleCols(begin, count) = s2.imputed;
    out.stage1_converged = out.stage1_converged && s1.converged;
    out.stage2_converged = out.stage2_converged && s2.converged;
    out.qp_fallback_used = out.qp_fallback_used || s1.qp_fallback_used;
    if (first) {
      out.stage1_trace = std::move(s1.trace);
      out.stage2_trace = std::move(s2.objective_trace);
      first = false;
    }
  }
  // No global K_tilde across chunks: the classifier trains on the Gram
  // matrix of the concatenated imputed data.
  out.classifier = train_dual(gram(opts.stage1.kernel, out.imputed),
                              train_scaled.labels, opts.stage1.C);
  return out;
}

namespace {

struct MiSelection {
  double C = 0, gamma = 0, holdout_acc = -1;
  DualSolution dual;
};

RepeatOutcome run_repeat(const IncompleteDataset& complete,
                         const EvaluateConfig& config, std::uint64_t seed) {
  RepeatOutcome out;
  out.seed = seed;

  SplitSpec sp = config.split;
  sp.seed = derive_seed(seed, 11);
  const SplitResult parts = split(complete, sp);
  const IncompleteDataset train_masked =
      apply_mcar(parts.train, config.missing_ratio, derive_seed(seed, 22));

  auto [train, scaler] = scale_min_max(train_masked);
  const IncompleteDataset holdout = apply_scaling(parts.holdout, scaler, true);
  const IncompleteDataset test = apply_scaling(parts.test, scaler, true);

  // MI baseline: grid-search (C, gamma) on the holdout set.
  const Matrix mi_imputed = mean_impute(train);
  MiSelection mi;
  for (double gamma : config.mi_grid.gamma_values) {
    KernelSpec spec{config.family, gamma, 0.0, 3};
    const Matrix K = gram(spec, mi_imputed);
    const Matrix cross = cross_kernel(spec, mi_imputed, holdout.features);
    for (double C : config.mi_grid.C_values) {
      DualSolution dual = train_dual(K, train.labels, C);
      const double acc = accuracy(
          predict(dual.alpha, dual.bias, train.labels, cross), holdout.labels);
      if (acc > mi.holdout_acc) {
        mi = {C, gamma, acc, std::move(dual)};
      }
    }
  }
  out.C_mi = mi.C;
  out.gamma_mi = mi.gamma;
  out.holdout_acc_mi = mi.holdout_acc;

  const double eta = config.pin_eta ? config.stage1.eta : mi.dual.alpha.norm();
  const double m_actual = train.missing_ratio();
  out.eta = eta;

  // Two-stage refinement around the MI choice.
  double best_acc = -1.0;
  TwoStageOutput best;
  KernelSpec best_spec;
  for (int gj = -1; gj <= 1; ++gj) {
    const double gamma = mi.gamma * std::pow(2.0, gj);
    KernelSpec spec{config.family, gamma, 0.0, 3};
    for (int ci = -1; ci <= 1; ++ci) {
      const double C = mi.C * std::pow(2.0, ci);
      TwoStageOptions opts;
      opts.stage1 = config.stage1;
      opts.stage1.C = C;
      opts.stage1.kernel = spec;
      opts.stage1.eta = eta;
      opts.stage1.rho = config.pin_rho ? config.stage1.rho
                                       : 5.0 * C / std::max(m_actual, 1e-6);
      opts.stage2 = config.stage2;
      opts.stage2.gamma = gamma;
      opts.subsets = config.subsets;
      TwoStageOutput ts = run_two_stage(train, opts);
      const double acc =
          accuracy(predict(ts.classifier.alpha, ts.classifier.bias, train.labels,
                           cross_kernel(spec, ts.imputed, holdout.features)),
                   holdout.labels);
      if (acc > best_acc) {
        best_acc = acc;
        best = std::move(ts);
        best_spec = spec;
        out.C_ts = C;
        out.gamma_ts = gamma;
        out.rho = opts.stage1.rho;
      }
    }
  }
  out.holdout_acc_ts = best_acc;
  out.stage1_converged = best.stage1_converged;
  out.qp_fallback_used = best.qp_fallback_used;

  // Test accuracy for both methods.
  KernelSpec mi_spec{config.family, mi.gamma, 0.0, 3};
  out.acc_mi = accuracy(
      predict(mi.dual.alpha, mi.dual.bias, train.labels,
              cross_kernel(mi_spec, mi_imputed, test.features)),
      test.labels);
  out.acc_ts = accuracy(
      predict(best.classifier.alpha, best.classifier.bias, train.labels,
              cross_kernel(best_spec, best.imputed, test.features)),
      test.labels);

  out.sep_mi = separability(mi_imputed, train.labels);
  out.sep_ts = separability(best.imputed, train.labels);
  return out;
}

}  // namespace

EvaluateResult evaluate(const IncompleteDataset& complete,
                        const EvaluateConfig& config) {
  if (config.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (config.mi_grid.C_values.empty() || config.mi_grid.gamma_values.empty())
    throw std::invalid_argument("grids must be non-empty");

  EvaluateResult result;
  result.repeats.resize(static_cast<size_t>(config.repeats));

  const int threads = std::max(1, config.threads);
  for (int wave = 0; wave < config.repeats; wave += threads) {
    std::vector<std::future<RepeatOutcome>> futures;
    const int end = std::min(config.repeats, wave + threads);
    for (int r = wave; r < end; ++r) {
      const std::uint64_t seed =
          derive_seed(config.master_seed, static_cast<std::uint64_t>(r));
      futures.push_back(std::async(std::launch::async, [&, seed] {
        return run_repeat(complete, config, seed);
      }));
    }
    for (int r = wave; r < end; ++r)
      result.repeats[static_cast<size_t>(r)] = futures[static_cast<size_t>(r - wave)].get();
  }

  auto summarize = [&](auto acc_of, auto sep_of) {
    MethodSummary s;
    double sum = 0.0;
    for (const auto& rep : result.repeats) sum += acc_of(rep);
    s.mean_acc = sum / static_cast<double>(config.repeats);
    if (config.repeats > 1) {
      double ss = 0.0;
      for (const auto& rep : result.repeats) {
        const double dev = acc_of(rep) - s.mean_acc;
        ss += dev * dev;
      }
      s.std_acc = std::sqrt(ss / static_cast<double>(config.repeats - 1));
    }
    for (const auto& rep : result.repeats) {
      const SeparabilityReport& sep = sep_of(rep);
      s.mean_sep.icd += sep.icd;
      s.mean_sep.fdr += sep.fdr;
      s.mean_sep.chi += sep.chi;
      s.mean_sep.dbi += sep.dbi;
    }
    const double n = static_cast<double>(config.repeats);
    s.mean_sep.icd /= n;
    s.mean_sep.fdr /= n;
    s.mean_sep.chi /= n;
    s.mean_sep.dbi /= n;
    return s;
  };

  result.mi = summarize([](const RepeatOutcome& r) { return r.acc_mi; },
                        [](const RepeatOutcome& r) -> const SeparabilityReport& {
                          return r.sep_mi;
                        });
  result.two_stage =
      summarize([](const RepeatOutcome& r) { return r.acc_ts; },
                [](const RepeatOutcome& r) -> const SeparabilityReport& {
                  return r.sep_ts;
                });
  return result;
}

KernelRecoverResult kernel_recover(const IncompleteDataset& complete,
                                   const KernelRecoverConfig& config) {
  if (!complete.fully_observed())
    throw std::invalid_argument("kernel_recover needs a complete dataset");
  auto [scaled, scaler] = scale_min_max(complete);
  (void)scaler;
  KernelRecoverResult out;
  out.ground_truth = scaled.features;
  const Matrix K_gt = gram(config.kernel, scaled.features);
  out.masked = apply_mcar(scaled, config.missing_ratio, config.seed);
  Stage2Config s2 = config.stage2;
  s2.gamma = config.kernel.gamma;
  out.imputation = run_stage2(out.masked, K_gt, s2);
  out.errors = imputation_errors(out.imputation.imputed, out.ground_truth,
                                 out.masked.mask, config.kernel);
  return out;
}

}  // namespace kimpute
