// Command-line front end: dataset preparation, two-stage imputation runs,
// the evaluation protocol, kernel-matrix recovery, and the property selftest.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kimpute/csv.hpp"
#include "kimpute/matops.hpp"
#include "kimpute/pipeline.hpp"
#include "kimpute/rng.hpp"

namespace fs = std::filesystem;
using namespace kimpute;

namespace {

// ---------------------------------------------------------------------------
// Flat key = value config file; CLI flags override file entries.

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

struct Settings {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  double num(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : std::stod(it->second);
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : std::stoll(it->second);
  }
  bool flag(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    return it->second == "1" || it->second == "true" || it->second == "yes";
  }
};

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

// ---------------------------------------------------------------------------

void prepare_out_dir(const std::string& out, bool force) {
  const fs::path p(out);
  if (fs::exists(p) && !fs::is_empty(p) && !force)
    throw std::runtime_error("output directory " + out +
                             " is not empty; pass --force to overwrite");
  fs::create_directories(p);
}

IncompleteDataset load_dataset(const Settings& s) {
  if (s.flag("synthetic", false) || !s.has("dataset")) {
    SyntheticSpec spec;
    spec.n_per_class = static_cast<int>(s.integer("synthetic_n_per_class", 200));
    spec.dim = static_cast<int>(s.integer("synthetic_dim", 30));
    spec.noise_intensity = s.num("synthetic_noise", 0.2);
    spec.outlier_fraction = s.num("synthetic_outlier_fraction", 0.1);
    spec.non_uniformity = s.num("synthetic_non_uniformity", 0.5);
    spec.seed = derive_seed(static_cast<std::uint64_t>(s.integer("seed", 0)), 101);
    return generate_synthetic(spec);
  }
  const std::string path = s.get("dataset", "");
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return load_csv(path);
  return load_libsvm(path);
}

void guard_size(const IncompleteDataset& ds, bool allow_large) {
  if (ds.sample_count() > 2000 && !allow_large)
    throw std::runtime_error(
        "dataset has more than 2000 samples; each iteration costs O(N^3) "
        "here, pass --allow-large to proceed");
}

KernelSpec kernel_from(const Settings& s) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(s.get("kernel_family", "gaussian"));
  spec.gamma = s.num("kernel_gamma", 1.0);
  spec.offset = s.num("kernel_offset", 0.0);
  spec.degree = static_cast<int>(s.integer("kernel_degree", 3));
  return spec;
}

Stage1Config stage1_from(const Settings& s) {
  Stage1Config c;
  c.C = s.num("C", 1.0);
  c.kernel = kernel_from(s);
  c.max_iters = static_cast<int>(s.integer("stage1_max_iters", 200));
  c.loss_tol = s.num("stage1_loss_tol", 1.5e-5);
  c.alpha_steps_per_iter = static_cast<int>(s.integer("stage1_alpha_steps", 10));
  c.refit_alpha = s.flag("refit_alpha", true);
  c.refit_blocks = static_cast<int>(s.integer("stage1_refit_blocks", 20));
  c.qp_soft_iters = static_cast<int>(s.integer("stage1_qp_soft_iters", 2000));
  c.qp_soft_iters_warm =
      static_cast<int>(s.integer("stage1_qp_soft_iters_warm", 600));
  return c;
}

Stage2Config stage2_from(const Settings& s) {
  Stage2Config c;
  c.gamma = s.num("kernel_gamma", 1.0);
  c.max_sweeps = static_cast<int>(s.integer("stage2_max_sweeps", 100));
  c.per_column_steps = static_cast<int>(s.integer("stage2_per_column_steps", 50));
  c.obj_tol = s.num("stage2_obj_tol", 1e-8);
  c.kernel_floor = s.num("stage2_kernel_floor", 1e-12);
  return c;
}

std::vector<std::string> manifest_lines(const Settings& s,
                                        const std::string& command) {
  std::vector<std::string> lines;
  lines.push_back("command = " + command);
  for (const auto& [k, v] : s.values) lines.push_back(k + " = " + v);
  return lines;
}

void set_default(Settings& s, const std::string& key, const std::string& v) {
  if (!s.has(key)) s.values[key] = v;
}

// Resolve every default into the settings map so the manifest is a complete
// record of the run.
void resolve_common(Settings& s) {
  set_default(s, "seed", "0");
  set_default(s, "kernel_family", "gaussian");
  set_default(s, "kernel_gamma", "1");
  set_default(s, "kernel_offset", "0");
  set_default(s, "kernel_degree", "3");
  set_default(s, "C", "1");
  set_default(s, "missing_ratio", "0");
  set_default(s, "stage1_max_iters", "200");
  set_default(s, "stage1_loss_tol", "1.5e-5");
  set_default(s, "stage1_alpha_steps", "10");
  set_default(s, "stage1_refit_blocks", "20");
  set_default(s, "stage1_qp_soft_iters", "2000");
  set_default(s, "stage1_qp_soft_iters_warm", "600");
  set_default(s, "stage2_max_sweeps", "100");
  set_default(s, "stage2_per_column_steps", "50");
  set_default(s, "stage2_obj_tol", "1e-8");
  set_default(s, "stage2_kernel_floor", "1e-12");
  set_default(s, "refit_alpha", "true");
  set_default(s, "subsets", "1");
  set_default(s, "threads", "2");
  if (!s.has("dataset")) {
    set_default(s, "synthetic", "true");
    set_default(s, "synthetic_n_per_class", "200");
    set_default(s, "synthetic_dim", "30");
    set_default(s, "synthetic_noise", "0.2");
    set_default(s, "synthetic_outlier_fraction", "0.1");
    set_default(s, "synthetic_non_uniformity", "0.5");
  }
}

void write_trace_csv(const std::string& path, const Stage1Trace& trace) {
  std::vector<std::string> lines;
  lines.push_back("iteration,loss,abs_dloss,min_eig_E,bound_violation_max");
  for (size_t t = 0; t < trace.loss.size(); ++t) {
    lines.push_back(std::to_string(t + 1) + "," + format_double(trace.loss[t]) +
                    "," + format_double(trace.abs_dloss[t]) + "," +
                    format_double(trace.min_eig_E[t]) + "," +
                    format_double(trace.bound_violation_max[t]));
  }
  write_lines(path, lines);
}

// ---------------------------------------------------------------------------

int cmd_impute(Settings s, bool force, bool allow_large) {
  const auto t0 = std::chrono::steady_clock::now();
  resolve_common(s);
  const std::string out = s.get("out", "out_impute");
  prepare_out_dir(out, force);

  IncompleteDataset ds = load_dataset(s);
  guard_size(ds, allow_large);

  const double m = s.num("missing_ratio", 0.0);
  if (!ds.fully_observed() && m > 0.0)
    throw std::runtime_error(
        "dataset already has missing values; drop missing_ratio");
  const std::uint64_t seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  if (ds.fully_observed() && m > 0.0)
    ds = apply_mcar(ds, m, derive_seed(seed, 22));

  auto [train, scaler] = scale_min_max(ds);

  Stage1Config s1 = stage1_from(s);
  Stage2Config s2 = stage2_from(s);
  s2.gamma = s1.kernel.gamma;

  // MI warm start fixes eta unless the config pins it.
  const Matrix mi = mean_impute(train);
  const DualSolution mi_dual = train_dual(gram(s1.kernel, mi), train.labels, s1.C);
  s1.eta = s.has("stage1_eta") ? s.num("stage1_eta", 1.0) : mi_dual.alpha.norm();
  const double m_actual = train.missing_ratio();
  s1.rho = s.has("stage1_rho") ? s.num("stage1_rho", 1.0)
                               : 5.0 * s1.C / std::max(m_actual, 1e-6);
  s.values["stage1_eta"] = format_double(s1.eta);
  s.values["stage1_rho"] = format_double(s1.rho);

  TwoStageOptions opts;
  opts.stage1 = s1;
  opts.stage2 = s2;
  opts.subsets = static_cast<int>(s.integer("subsets", 1));
  const TwoStageOutput res = run_two_stage(train, opts);

  write_matrix_csv(out + "/imputed.csv", unscale(res.imputed, scaler));
  write_matrix_csv(out + "/imputed_scaled.csv", res.imputed);
  if (opts.subsets <= 1) write_matrix_csv(out + "/kernel.csv", res.K_tilde);
  write_trace_csv(out + "/stage1_trace.csv", res.stage1_trace);
  {
    std::vector<std::string> lines;
    lines.push_back("sweep,objective");
    for (size_t t = 0; t < res.stage2_trace.size(); ++t)
      lines.push_back(std::to_string(t) + "," + format_double(res.stage2_trace[t]));
    write_lines(out + "/stage2_trace.csv", lines);
  }

  auto lines = manifest_lines(s, "impute");
  lines.push_back("stage1_converged = " +
                  std::string(res.stage1_converged ? "true" : "false"));
  lines.push_back("stage2_converged = " +
                  std::string(res.stage2_converged ? "true" : "false"));
  lines.push_back("qp_fallback_used = " +
                  std::string(res.qp_fallback_used ? "true" : "false"));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  lines.push_back("wall_clock_seconds = " + format_double(wall));
  write_lines(out + "/manifest.txt", lines);

  std::cout << "imputation written to " << out << "\n";
  return 0;
}

int cmd_evaluate(Settings s, bool force, bool allow_large) {
  const auto t0 = std::chrono::steady_clock::now();
  resolve_common(s);
  set_default(s, "missing_ratio", "0.6");
  set_default(s, "repeats", "10");
  set_default(s, "train_fraction", "0.4");
  set_default(s, "holdout_fraction", "0.3");
  set_default(s, "test_fraction", "0.3");
  const std::string out = s.get("out", "out_evaluate");
  prepare_out_dir(out, force);

  const IncompleteDataset ds = load_dataset(s);
  guard_size(ds, allow_large);
  if (!ds.fully_observed())
    throw std::runtime_error("evaluate expects a fully observed dataset");

  EvaluateConfig cfg;
  cfg.split.train_fraction = s.num("train_fraction", 0.4);
  cfg.split.holdout_fraction = s.num("holdout_fraction", 0.3);
  cfg.split.test_fraction = s.num("test_fraction", 0.3);
  cfg.missing_ratio = s.num("missing_ratio", 0.6);
  cfg.family = kernel_from(s).family;
  cfg.mi_grid = default_mi_grid();
  if (s.has("c_grid")) cfg.mi_grid.C_values = parse_list(s.get("c_grid", ""));
  if (s.has("gamma_grid"))
    cfg.mi_grid.gamma_values = parse_list(s.get("gamma_grid", ""));
  cfg.repeats = static_cast<int>(s.integer("repeats", 10));
  cfg.master_seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  cfg.stage1 = stage1_from(s);
  cfg.stage2 = stage2_from(s);
  cfg.subsets = static_cast<int>(s.integer("subsets", 1));
  cfg.threads = static_cast<int>(s.integer("threads", 2));
  if (s.has("stage1_eta")) {
    cfg.pin_eta = true;
    cfg.stage1.eta = s.num("stage1_eta", 1.0);
  }
  if (s.has("stage1_rho")) {
    cfg.pin_rho = true;
    cfg.stage1.rho = s.num("stage1_rho", 1.0);
  }

  const EvaluateResult res = evaluate(ds, cfg);

  {
    std::vector<std::string> lines;
    lines.push_back(
        "seed,C_mi,gamma_mi,holdout_acc_mi,test_acc_mi,C_ts,gamma_ts,"
        "holdout_acc_ts,test_acc_ts,eta,rho,icd_mi,fdr_mi,chi_mi,dbi_mi,"
        "icd_ts,fdr_ts,chi_ts,dbi_ts,stage1_converged,qp_fallback_used");
    for (const auto& r : res.repeats) {
      std::ostringstream row;
      row << r.seed << ',' << format_double(r.C_mi) << ','
          << format_double(r.gamma_mi) << ',' << format_double(r.holdout_acc_mi)
          << ',' << format_double(r.acc_mi) << ',' << format_double(r.C_ts)
          << ',' << format_double(r.gamma_ts) << ','
          << format_double(r.holdout_acc_ts) << ',' << format_double(r.acc_ts)
          << ',' << format_double(r.eta) << ',' << format_double(r.rho) << ','
          << format_double(r.sep_mi.icd) << ',' << format_double(r.sep_mi.fdr)
          << ',' << format_double(r.sep_mi.chi) << ','
          << format_double(r.sep_mi.dbi) << ',' << format_double(r.sep_ts.icd)
          << ',' << format_double(r.sep_ts.fdr) << ','
          << format_double(r.sep_ts.chi) << ',' << format_double(r.sep_ts.dbi)
          << ',' << (r.stage1_converged ? 1 : 0) << ','
          << (r.qp_fallback_used ? 1 : 0);
      lines.push_back(row.str());
    }
    write_lines(out + "/results.csv", lines);
  }

  {
    std::ostringstream rep;
    rep << "test accuracy over " << res.repeats.size() << " repeats\n";
    rep << "  mean imputation : " << res.mi.mean_acc << " +/- " << res.mi.std_acc
        << "\n";
    rep << "  two-stage       : " << res.two_stage.mean_acc << " +/- "
        << res.two_stage.std_acc << "\n";
    rep << "separability of imputed training data (mean over repeats)\n";
    rep << "  method      icd      fdr      chi      dbi\n";
    auto sep_row = [](const char* name, const SeparabilityReport& p) {
      std::ostringstream o;
      o << "  " << name << "  " << p.icd << "  " << p.fdr << "  " << p.chi
        << "  " << p.dbi << "\n";
      return o.str();
    };
    rep << sep_row("MI       ", res.mi.mean_sep);
    rep << sep_row("two-stage", res.two_stage.mean_sep);
    std::vector<std::string> lines;
    std::stringstream ss(rep.str());
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    write_lines(out + "/summary.txt", lines);
    std::cout << rep.str();
  }

  auto lines = manifest_lines(s, "evaluate");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  lines.push_back("wall_clock_seconds = " + format_double(wall));
  write_lines(out + "/manifest.txt", lines);
  return 0;
}

int cmd_kernel_recover(Settings s, bool force, bool allow_large) {
  const auto t0 = std::chrono::steady_clock::now();
  resolve_common(s);
  set_default(s, "missing_ratio", "0.1");
  const std::string out = s.get("out", "out_kernel_recover");
  prepare_out_dir(out, force);

  const IncompleteDataset ds = load_dataset(s);
  guard_size(ds, allow_large);

  KernelRecoverConfig cfg;
  cfg.kernel = kernel_from(s);
  cfg.missing_ratio = s.num("missing_ratio", 0.1);
  cfg.seed = derive_seed(static_cast<std::uint64_t>(s.integer("seed", 0)), 22);
  cfg.stage2 = stage2_from(s);

  const KernelRecoverResult res = kernel_recover(ds, cfg);

  write_lines(out + "/errors.csv",
              {"e_X_max,e_X_mean,e_K_max,e_K_mean",
               format_double(res.errors.e_X_max) + "," +
                   format_double(res.errors.e_X_mean) + "," +
                   format_double(res.errors.e_K_max) + "," +
                   format_double(res.errors.e_K_mean)});
  write_matrix_csv(out + "/imputed.csv", res.imputation.imputed);

  auto lines = manifest_lines(s, "kernel-recover");
  lines.push_back("stage2_converged = " +
                  std::string(res.imputation.converged ? "true" : "false"));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  lines.push_back("wall_clock_seconds = " + format_double(wall));
  write_lines(out + "/manifest.txt", lines);

  std::cout << "e_X_max=" << res.errors.e_X_max
            << " e_X_mean=" << res.errors.e_X_mean
            << " e_K_max=" << res.errors.e_K_max
            << " e_K_mean=" << res.errors.e_K_mean << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Property suites on fixed seeds.

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  Rng rng(20240901);
  auto random_symmetric = [&](Index n) {
    Matrix A(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) A(i, j) = 2.0 * uniform01(rng) - 1.0;
    return Matrix(0.5 * (A + A.transpose()));
  };

  {
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
      const Matrix A = random_symmetric(8);
      const Matrix B = random_symmetric(8);
      const Matrix PA = psd_project(A);
      ok = ok && (psd_project(PA) - PA).norm() <= 1e-10 * std::max(1.0, PA.norm());
      ok = ok && (PA - psd_project(B)).norm() <= (A - B).norm() + 1e-12;
      ok = ok && min_eigenvalue(PA) >= -1e-10;
    }
    check("psd projection idempotent / non-expansive", ok);
  }

  {
    bool ok = true;
    for (Index n = 1; n <= 6 && ok; ++n) {
      const Matrix Q =
          Eigen::HouseholderQR<Matrix>(random_symmetric(n)).householderQ();
      ok = verify_vvt_identity(Q);
    }
    check("V V^T identity on orthogonal bases", ok);
  }

  {
    bool ok = true;
    for (int rep = 0; rep < 20 && ok; ++rep) {
      const Index n = 3 + static_cast<Index>(uniform_below(rng, 6));
      const Matrix K = psd_project(random_symmetric(n));
      Vector y(n), a(n);
      for (Index i = 0; i < n; ++i) {
        y[i] = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        a[i] = uniform01(rng);
      }
      const Vector g = dual_gradient(a, K, y);
      for (Index i = 0; i < n && ok; ++i) {
        const double h = 1e-6;
        Vector ap = a, am = a;
        ap[i] += h;
        am[i] -= h;
        const double fd =
            (dual_objective(ap, K, y) - dual_objective(am, K, y)) / (2 * h);
        ok = std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i]));
      }
      const Vector p = project_alpha(10.0 * (a.array() - 0.5).matrix(), y, 1.0);
      ok = ok && std::abs(y.dot(p)) <= 1e-12 * n;
    }
    check("svm gradient and alpha projection", ok);
  }

  {
    // Closed forms of the two inner updates are stationary points.
    bool ok = true;
    for (int rep = 0; rep < 10 && ok; ++rep) {
      const Index n = 3 + static_cast<Index>(uniform_below(rng, 3));
      Matrix Ko = psd_project(random_symmetric(n));
      Ko.diagonal().array() += 1.0;
      Vector y(n), a(n);
      for (Index i = 0; i < n; ++i) {
        y[i] = i % 2 == 0 ? 1.0 : -1.0;
        a[i] = uniform01(rng);
      }
      const double eta = 1.0 + uniform01(rng), rho = 1.0 + uniform01(rng);
      const Matrix E = psd_project(random_symmetric(n));
      const Vector ay = a.cwiseProduct(y);
      const Matrix hatK =
          Matrix::Ones(n, n) +
          (ay.asDiagonal() * Ko.cwiseProduct(E) * ay.asDiagonal()) / (4.0 * eta);
      auto objective = [&](const Matrix& Kd) {
        const Matrix Keff = Ko.cwiseProduct(Kd).cwiseProduct(E);
        return -0.5 * a.dot(y.cwiseProduct(Keff * y.cwiseProduct(a))) +
               eta * (Kd - Matrix::Ones(n, n)).squaredNorm();
      };
      double gnorm = 0.0;
      const double h = 1e-5;
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          Matrix Kp = hatK, Km = hatK;
          Kp(i, j) += h;
          Km(i, j) -= h;
          const double g = (objective(Kp) - objective(Km)) / (2 * h);
          gnorm += g * g;
        }
      }
      ok = std::sqrt(gnorm) < 1e-8;
    }
    check("stage-1 closed form is stationary", ok);
  }

  {
    // BCD monotonicity on a small recovery problem.
    SyntheticSpec spec;
    spec.n_per_class = 15;
    spec.dim = 5;
    spec.noise_intensity = 0.0;
    spec.outlier_fraction = 0.0;
    spec.non_uniformity = 0.0;
    spec.seed = 7;
    const IncompleteDataset full = generate_synthetic(spec);
    const KernelSpec kernel{KernelFamily::gaussian, 1.0, 0.0, 3};
    const Matrix K_gt = gram(kernel, full.features);
    const IncompleteDataset masked = apply_mcar(full, 0.3, 99);
    Stage2Config cfg;
    cfg.max_sweeps = 30;
    const ImputationResult res = run_stage2(masked, K_gt, cfg);
    bool ok = true;
    for (size_t t = 1; t < res.objective_trace.size(); ++t)
      ok = ok && res.objective_trace[t] <= res.objective_trace[t - 1] + 1e-9;
    ok = ok && (res.delta_X.cwiseProduct(masked.mask)).cwiseAbs().maxCoeff() == 0.0;
    ok = ok && res.imputed.minCoeff() >= 0.0 && res.imputed.maxCoeff() <= 1.0;
    check("stage-2 BCD monotone and feasible", ok);
  }

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage kernel-guided data imputation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, dataset;
  std::int64_t seed = -1;
  double missing_ratio = -1.0, C = -1.0, gamma = -1.0;
  int repeats = -1, subsets = -1;
  bool force = false, allow_large = false;
  bool refit = true, refit_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key = value config file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--dataset", dataset, "libsvm or csv dataset path");
    cmd->add_option("--missing-ratio", missing_ratio, "MCAR missing ratio");
    cmd->add_option("--C", C, "SVM penalty parameter");
    cmd->add_option("--gamma", gamma, "kernel bandwidth");
    cmd->add_flag("--force", force, "overwrite a non-empty output directory");
    cmd->add_flag("--allow-large", allow_large, "lift the N > 2000 guard");
  };

  auto* impute = app.add_subcommand("impute", "run the two-stage pipeline");
  add_common(impute);
  impute->add_option("--subsets", subsets, "impute column chunks independently");
  impute->add_flag("--refit-alpha,!--no-refit-alpha", refit,
                   "re-optimize alpha on the completed kernel")
      ->each([&](const std::string&) { refit_set = true; });

  auto* eval = app.add_subcommand("evaluate", "MI vs two-stage comparison");
  add_common(eval);
  eval->add_option("--repeats", repeats, "number of seeded repeats");
  eval->add_option("--subsets", subsets, "impute column chunks independently");

  auto* recover =
      app.add_subcommand("kernel-recover", "stage 2 against the exact Gram matrix");
  add_common(recover);

  app.add_subcommand("selftest", "run the property suites");

  CLI11_PARSE(app, argc, argv);

  try {
    Settings s;
    if (!config_path.empty()) s.values = parse_config_file(config_path);
    if (!out_dir.empty()) s.values["out"] = out_dir;
    if (seed >= 0) s.values["seed"] = std::to_string(seed);
    if (!dataset.empty()) s.values["dataset"] = dataset;
    if (missing_ratio >= 0) s.values["missing_ratio"] = std::to_string(missing_ratio);
    if (C > 0) s.values["C"] = std::to_string(C);
    if (gamma > 0) s.values["kernel_gamma"] = std::to_string(gamma);
    if (repeats > 0) s.values["repeats"] = std::to_string(repeats);
    if (subsets > 0) s.values["subsets"] = std::to_string(subsets);
    if (refit_set) s.values["refit_alpha"] = refit ? "true" : "false";

    if (app.got_subcommand("impute")) return cmd_impute(s, force, allow_large);
    if (app.got_subcommand("evaluate")) return cmd_evaluate(s, force, allow_large);
    if (app.got_subcommand("kernel-recover"))
      return cmd_kernel_recover(s, force, allow_large);
    if (app.got_subcommand("selftest")) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
