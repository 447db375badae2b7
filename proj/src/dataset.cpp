#include "kimpute/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kimpute/rng.hpp"

namespace kimpute {

double IncompleteDataset::missing_ratio() const {
  const double total = static_cast<double>(mask.size());
  if (total == 0) return 0.0;
  return 1.0 - mask.sum() / total;
}

bool IncompleteDataset::fully_observed() const {
  return mask.size() == 0 || mask.minCoeff() > 0.5;
}

namespace {

void validate_labels(const IncompleteDataset& ds) {
  for (Index i = 0; i < ds.labels.size(); ++i) {
    const double v = ds.labels[i];
    if (v != 1.0 && v != -1.0)
      throw std::runtime_error("labels must be -1 or +1 after mapping");
  }
}

// Maps raw label values onto {-1,+1}: already binary, or {0,1} with 0 -> -1.
Vector map_labels(const std::vector<double>& raw) {
  std::set<double> distinct(raw.begin(), raw.end());
  Vector out(static_cast<Index>(raw.size()));
  const std::set<double> pm{-1.0, 1.0};
  const std::set<double> zo{0.0, 1.0};
  auto subset_of = [&](const std::set<double>& big) {
    return std::includes(big.begin(), big.end(), distinct.begin(), distinct.end());
  };
  if (subset_of(pm)) {
    for (size_t i = 0; i < raw.size(); ++i) out[static_cast<Index>(i)] = raw[i];
  } else if (subset_of(zo)) {
    for (size_t i = 0; i < raw.size(); ++i)
      out[static_cast<Index>(i)] = raw[i] == 0.0 ? -1.0 : 1.0;
  } else {
    throw std::runtime_error("non-binary labels: expected {-1,+1} or {0,1}");
  }
  return out;
}

double parse_number(const std::string& tok, size_t line_no, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                             ": bad " + std::string(what) + " '" + tok + "'");
  }
  return v;
}

}  // namespace

IncompleteDataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::vector<double> labels_raw;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  Index max_index = 0;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    labels_raw.push_back(parse_number(tok, line_no, "label"));
    std::vector<std::pair<Index, double>> entries;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": expected index:value, got '" + tok + "'");
      const double idx = parse_number(tok.substr(0, colon), line_no, "index");
      const double val = parse_number(tok.substr(colon + 1), line_no, "value");
      if (idx < 1 || idx != std::floor(idx))
        throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                 ": feature indices are 1-based integers");
      const Index i = static_cast<Index>(idx);
      max_index = std::max(max_index, i);
      entries.emplace_back(i - 1, val);
    }
    rows.push_back(std::move(entries));
  }

  const Index n = static_cast<Index>(rows.size());
  const Index d = max_index;
  IncompleteDataset ds;
  ds.features = Matrix::Zero(d, n);
  ds.mask = Matrix::Ones(d, n);  // absent indices are observed zeros
  for (Index j = 0; j < n; ++j)
    for (const auto& [i, v] : rows[static_cast<size_t>(j)]) ds.features(i, j) = v;
  ds.labels = n > 0 ? map_labels(labels_raw) : Vector(0);
  validate_labels(ds);
  return ds;
}

IncompleteDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line))
    return IncompleteDataset{Matrix(0, 0), Matrix(0, 0), Vector(0)};

  auto split_fields = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };

  const auto header = split_fields(line);
  Index label_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    std::string low = header[c];
    std::transform(low.begin(), low.end(), low.begin(), ::tolower);
    if (low == "label") label_col = static_cast<Index>(c);
  }
  if (label_col < 0) throw std::runtime_error("csv is missing a 'label' column");
  const Index d = static_cast<Index>(header.size()) - 1;

  std::vector<double> labels_raw;
  std::vector<std::vector<std::pair<double, bool>>> rows;  // value, observed
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    std::vector<std::pair<double, bool>> row;
    for (size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<Index>(c) == label_col) {
        labels_raw.push_back(parse_number(fields[c], line_no, "label"));
      } else if (fields[c] == "NA") {
        row.emplace_back(0.0, false);
      } else {
        row.emplace_back(parse_number(fields[c], line_no, "value"), true);
      }
    }
    rows.push_back(std::move(row));
  }

  const Index n = static_cast<Index>(rows.size());
  IncompleteDataset ds;
  ds.features = Matrix::Zero(d, n);
  ds.mask = Matrix::Ones(d, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) {
      const auto& [v, obs] = rows[static_cast<size_t>(j)][static_cast<size_t>(i)];
      ds.features(i, j) = v;
      ds.mask(i, j) = obs ? 1.0 : 0.0;
    }
  }
  ds.labels = n > 0 ? map_labels(labels_raw) : Vector(0);
  validate_labels(ds);
  return ds;
}

std::pair<IncompleteDataset, ScalingParams> scale_min_max(
    const IncompleteDataset& ds) {
  const Index d = ds.feature_count();
  const Index n = ds.sample_count();
  ScalingParams params;
  params.feature_min = Vector::Zero(d);
  params.feature_max = Vector::Zero(d);

  for (Index i = 0; i < d; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    Index observed = 0;
    for (Index j = 0; j < n; ++j) {
      if (ds.mask(i, j) > 0.5) {
        lo = std::min(lo, ds.features(i, j));
        hi = std::max(hi, ds.features(i, j));
        ++observed;
      }
    }
    if (observed == 0)
      throw std::runtime_error("feature " + std::to_string(i) +
                               " has no observed entries");
    params.feature_min[i] = lo;
    params.feature_max[i] = hi;
  }

  return {apply_scaling(ds, params, false), params};
}

IncompleteDataset apply_scaling(const IncompleteDataset& ds,
                                const ScalingParams& params, bool clamp) {
  IncompleteDataset out = ds;
  const Index d = ds.feature_count();
  const Index n = ds.sample_count();
  for (Index i = 0; i < d; ++i) {
    const double lo = params.feature_min[i];
    const double range = params.feature_max[i] - lo;
    for (Index j = 0; j < n; ++j) {
      if (ds.mask(i, j) > 0.5) {
        // Constant feature: observed values map to 0.
        double v = range > 0 ? (ds.features(i, j) - lo) / range : 0.0;
        if (clamp) v = std::clamp(v, 0.0, 1.0);
        out.features(i, j) = v;
      } else {
        out.features(i, j) = 0.0;
      }
    }
  }
  return out;
}

Matrix unscale(const Matrix& features, const ScalingParams& params) {
  Matrix out = features;
  for (Index i = 0; i < features.rows(); ++i) {
    const double lo = params.feature_min[i];
    const double range = params.feature_max[i] - lo;
    for (Index j = 0; j < features.cols(); ++j)
      out(i, j) = range > 0 ? features(i, j) * range + lo : lo;
  }
  return out;
}

IncompleteDataset apply_mcar(const IncompleteDataset& ds, double missing_ratio,
                             std::uint64_t seed) {
  if (missing_ratio < 0.0 || missing_ratio >= 1.0)
    throw std::invalid_argument("missing ratio must lie in [0, 1)");
  if (!ds.fully_observed())
    throw std::invalid_argument("apply_mcar expects a fully observed dataset");

  const Index total = ds.features.size();
  const Index k = static_cast<Index>(
      std::llround(static_cast<double>(total) * missing_ratio));

  IncompleteDataset out = ds;
  if (k == 0) return out;

  // Partial Fisher-Yates over flat indices: first k slots are the masked set.
  std::vector<Index> idx(static_cast<size_t>(total));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  for (Index t = 0; t < k; ++t) {
    const Index pick =
        t + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(total - t)));
    std::swap(idx[static_cast<size_t>(t)], idx[static_cast<size_t>(pick)]);
  }
  const Index d = ds.feature_count();
  for (Index t = 0; t < k; ++t) {
    const Index flat = idx[static_cast<size_t>(t)];
    const Index i = flat % d;
    const Index j = flat / d;
    out.mask(i, j) = 0.0;
    out.features(i, j) = 0.0;
  }
  return out;
}

SplitResult split(const IncompleteDataset& ds, const SplitSpec& spec) {
  const double sum =
      spec.train_fraction + spec.holdout_fraction + spec.test_fraction;
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("split fractions must sum to 1");
  const Index n = ds.sample_count();
  if (n < 3) throw std::invalid_argument("split needs at least 3 samples");

  // Largest-remainder apportionment; ties go to the earlier subset.
  const double fracs[3] = {spec.train_fraction, spec.holdout_fraction,
                           spec.test_fraction};
  Index sizes[3];
  double remainders[3];
  Index assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = fracs[s] * static_cast<double>(n);
    sizes[s] = static_cast<Index>(std::floor(exact));
    remainders[s] = exact - std::floor(exact);
    assigned += sizes[s];
  }
  while (assigned < n) {
    int best = 0;
    for (int s = 1; s < 3; ++s)
      if (remainders[s] > remainders[best]) best = s;
    ++sizes[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  for (int s = 0; s < 3; ++s)
    if (sizes[s] == 0) throw std::runtime_error("split produced an empty subset");

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(spec.seed);
  for (Index t = n - 1; t > 0; --t) {
    const Index pick =
        static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(t + 1)));
    std::swap(order[static_cast<size_t>(t)], order[static_cast<size_t>(pick)]);
  }

  auto take = [&](Index begin, Index count) {
    IncompleteDataset part;
    part.features.resize(ds.feature_count(), count);
    part.mask.resize(ds.feature_count(), count);
    part.labels.resize(count);
    for (Index j = 0; j < count; ++j) {
      const Index src = order[static_cast<size_t>(begin + j)];
      part.features.col(j) = ds.features.col(src);
      part.mask.col(j) = ds.mask.col(src);
      part.labels[j] = ds.labels[src];
    }
    return part;
  };

  SplitResult out;
  out.train = take(0, sizes[0]);
  out.holdout = take(sizes[0], sizes[1]);
  out.test = take(sizes[0] + sizes[1], sizes[2]);
  return out;
}

IncompleteDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.dim < 1 || spec.n_per_class < 1)
    throw std::invalid_argument("synthetic spec needs dim >= 1 and n_per_class >= 1");
  if (spec.outlier_fraction < 0.0 || spec.outlier_fraction > 1.0)
    throw std::invalid_argument("outlier_fraction must lie in [0, 1]");

  const Index d = spec.dim;
  const Index n = 2 * static_cast<Index>(spec.n_per_class);
  Rng rng(spec.seed);

  // Shared diagonal covariance 1 + non_uniformity * U(0,1) per dimension.
  Vector sigma(d);
  for (Index i = 0; i < d; ++i)
    sigma[i] = std::sqrt(1.0 + spec.non_uniformity * uniform01(rng));

  IncompleteDataset ds;
  ds.features.resize(d, n);
  ds.mask = Matrix::Ones(d, n);
  ds.labels.resize(n);
  for (Index j = 0; j < n; ++j) {
    const double mean = j < n / 2 ? -1.0 : 1.0;
    ds.labels[j] = mean;
    for (Index i = 0; i < d; ++i)
      ds.features(i, j) = mean + sigma[i] * normal01(rng);
  }

  if (spec.noise_intensity > 0.0) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < d; ++i)
        ds.features(i, j) += spec.noise_intensity * normal01(rng);
  }

  const Index n_out = static_cast<Index>(
      std::llround(spec.outlier_fraction * static_cast<double>(n)));
  if (n_out > 0) {
    std::vector<Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index t = 0; t < n_out; ++t) {
      const Index pick =
          t + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n - t)));
      std::swap(idx[static_cast<size_t>(t)], idx[static_cast<size_t>(pick)]);
    }
    for (Index t = 0; t < n_out; ++t) {
      const Index j = idx[static_cast<size_t>(t)];
      for (Index i = 0; i < d; ++i)
        ds.features(i, j) += 10.0 * (uniform01(rng) - 0.5);
    }
  }

  return scale_min_max(ds).first;
}

Matrix mean_impute(const IncompleteDataset& ds) {
  const Index d = ds.feature_count();
  const Index n = ds.sample_count();
  Matrix out = ds.features;
  for (Index i = 0; i < d; ++i) {
    double sum = 0.0;
    Index count = 0;
    for (Index j = 0; j < n; ++j) {
      if (ds.mask(i, j) > 0.5) {
        sum += ds.features(i, j);
        ++count;
      }
    }
    if (count == 0)
      throw std::runtime_error("feature " + std::to_string(i) +
                               " has no observed entries");
    const double mean = sum / static_cast<double>(count);
    for (Index j = 0; j < n; ++j)
      if (ds.mask(i, j) < 0.5) out(i, j) = mean;
  }
  return out;
}

}  // namespace kimpute
