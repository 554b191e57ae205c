#include "gxai/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gxai/metrics.hpp"

namespace gxai {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Eigen::VectorXd LogisticModel::expand(const std::vector<double>& values) const {
  if (values.size() != schema.size())
    throw std::invalid_argument("LogisticModel: record width mismatch");
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(weights.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto [offset, width] = expansion[f];
    const FeatureSpec& spec = schema.features[f];
    switch (spec.kind) {
      case FeatureKind::Binary:
        phi(offset) = values[f];
        break;
      case FeatureKind::Continuous: {
        auto it = stats.mean_sd.find(static_cast<int>(f));
        const double mean = it != stats.mean_sd.end() ? it->second.first : 0.0;
        const double sd = it != stats.mean_sd.end() ? it->second.second : 1.0;
        phi(offset) = encode_continuous(values[f], mean, sd);
        break;
      }
      case FeatureKind::Categorical:
        phi(offset + static_cast<int>(values[f])) = 1.0;
        break;
    }
    (void)width;
  }
  return phi;
}

double LogisticModel::predict(const std::vector<double>& values) const {
  return sigm(weights.dot(expand(values)) + bias);
}

std::vector<double> LogisticModel::feature_weight_magnitudes() const {
  std::vector<double> out(schema.size(), 0.0);
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto [offset, width] = expansion[f];
    for (int c = 0; c < width; ++c) out[f] += std::abs(weights(offset + c));
  }
  return out;
}

LogisticModel train_logistic(const Dataset& train, double l2_lambda, int max_iters) {
  train.schema.validate();
  if (train.size() == 0) throw std::invalid_argument("train_logistic: empty dataset");
  long npos = 0;
  for (const Record& r : train.records) npos += r.label;
  const long nneg = static_cast<long>(train.size()) - npos;
  if (npos == 0 || nneg == 0)
    throw std::invalid_argument("train_logistic: both classes must be present");

  LogisticModel model;
  model.schema = train.schema;
  model.stats = train.stats ? *train.stats : compute_stats(train);
  model.l2_lambda = l2_lambda;
  int p = 0;
  for (const FeatureSpec& f : train.schema.features) {
    const int width = f.kind == FeatureKind::Categorical ? f.cardinality : 1;
    model.expansion.push_back({p, width});
    p += width;
  }
  model.weights = Eigen::VectorXd::Zero(p);
  model.bias = 0.0;

  const long n = static_cast<long>(train.size());
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n), cw(n);
  const double w_pos = static_cast<double>(n) / (2.0 * npos);
  const double w_neg = static_cast<double>(n) / (2.0 * nneg);
  for (long i = 0; i < n; ++i) {
    X.row(i) = model.expand(train.records[i].values);
    y(i) = train.records[i].label;
    cw(i) = train.records[i].label == 1 ? w_pos : w_neg;
  }

  auto objective = [&](const Eigen::VectorXd& w, double b) {
    const Eigen::VectorXd z = X * w + Eigen::VectorXd::Constant(n, b);
    double loss = 0.0;
    for (long i = 0; i < n; ++i) loss += cw(i) * (softplus(z(i)) - y(i) * z(i));
    loss /= static_cast<double>(n);
    loss += 0.5 * l2_lambda * w.squaredNorm();
    if (!std::isfinite(loss)) throw std::runtime_error("train_logistic: non-finite objective");
    return loss;
  };

  double f = objective(model.weights, model.bias);
  double step = 1.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd z = X * model.weights + Eigen::VectorXd::Constant(n, model.bias);
    Eigen::VectorXd resid(n);
    for (long i = 0; i < n; ++i) resid(i) = cw(i) * (sigm(z(i)) - y(i));
    Eigen::VectorXd gw = (X.transpose() * resid) / static_cast<double>(n) +
                         l2_lambda * model.weights;
    const double gb = resid.sum() / static_cast<double>(n);
    const double gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (gnorm < 1e-6) break;

    // backtracking line search (Armijo)
    const double slope = -(gw.squaredNorm() + gb * gb);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd w_try = model.weights - step * gw;
      const double b_try = model.bias - step * gb;
      const double f_try = objective(w_try, b_try);
      if (f_try <= f + 1e-4 * step * slope) {
        model.weights = w_try;
        model.bias = b_try;
        f = f_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow; no further progress possible
    step = std::min(step * 2.0, 1e4);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Shapley attribution

namespace {

// mean over background rows of score_fn with masked-out features replaced
double coalition_value(const ScoreFn& score_fn, const Dataset& background,
                       const std::vector<double>& x, std::uint64_t mask) {
  const std::size_t d = x.size();
  double sum = 0.0;
  std::vector<double> composed(d);
  for (const Record& b : background.records) {
    for (std::size_t j = 0; j < d; ++j)
      composed[j] = (mask >> j) & 1 ? x[j] : b.values[j];
    sum += score_fn(composed);
  }
  return sum / static_cast<double>(background.size());
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - i + 1) / i;
  return r;
}

}  // namespace

AttributionResult exact_shapley(const ScoreFn& score_fn, const Dataset& background,
                                const std::vector<double>& x, int d_max) {
  const int d = static_cast<int>(x.size());
  if (background.size() == 0) throw std::invalid_argument("exact_shapley: empty background");
  if (static_cast<int>(background.schema.size()) != d)
    throw std::invalid_argument("exact_shapley: background width mismatch");
  if (d > d_max)
    throw std::runtime_error("exact_shapley: d=" + std::to_string(d) + " exceeds d_max=" +
                             std::to_string(d_max) + "; use sampled_shapley");

  const std::size_t nmask = std::size_t{1} << d;
  std::vector<double> v(nmask);
  for (std::size_t m = 0; m < nmask; ++m)
    v[m] = coalition_value(score_fn, background, x, m);

  std::vector<double> fact(d + 1, 1.0);
  for (int k = 1; k <= d; ++k) fact[k] = fact[k - 1] * k;
  std::vector<double> weight(d);
  for (int s = 0; s < d; ++s) weight[s] = fact[s] * fact[d - 1 - s] / fact[d];

  AttributionResult res;
  res.method = AttributionMethod::ExactShapley;
  res.baseline_description =
      "interventional, background = " + std::to_string(background.size()) + " rows";
  res.values.assign(d, 0.0);
  for (std::size_t m = 0; m < nmask; ++m) {
    const int s = __builtin_popcountll(m);
    for (int i = 0; i < d; ++i) {
      if ((m >> i) & 1) continue;
      res.values[i] += weight[s] * (v[m | (std::size_t{1} << i)] - v[m]);
    }
  }
  return res;
}

AttributionResult sampled_shapley(const ScoreFn& score_fn, const Dataset& background,
                                  const std::vector<double>& x, int n_coalitions,
                                  std::uint64_t seed) {
  const int d = static_cast<int>(x.size());
  if (background.size() == 0) throw std::invalid_argument("sampled_shapley: empty background");
  if (n_coalitions < 2 * d + 2)
    throw std::invalid_argument("sampled_shapley: need n_coalitions >= 2d+2");

  const double v_empty = coalition_value(score_fn, background, x, 0);
  const std::uint64_t full = d < 64 ? (std::uint64_t{1} << d) - 1 : ~std::uint64_t{0};
  const double v_full = coalition_value(score_fn, background, x, full);
  const double total = v_full - v_empty;

  const bool exhaustive =
      d < 30 && static_cast<std::uint64_t>(n_coalitions) >= (std::uint64_t{1} << d);

  for (int attempt = 0; attempt < 5; ++attempt) {
    // coalition mask -> fit weight
    std::map<std::uint64_t, double> coalitions;
    if (exhaustive) {
      for (std::uint64_t m = 1; m < full; ++m) {
        const int s = __builtin_popcountll(m);
        coalitions[m] = (d - 1.0) / (binom(d, s) * s * (d - s));  // Shapley kernel
      }
    } else {
      // sample sizes from the kernel distribution, subsets uniform per size
      std::mt19937_64 rng(seed + attempt);
      std::vector<double> size_weight(d, 0.0);
      for (int s = 1; s <= d - 1; ++s) size_weight[s] = (d - 1.0) / (s * (d - s));
      std::discrete_distribution<int> size_dist(size_weight.begin(), size_weight.end());
      std::vector<int> idx(d);
      std::iota(idx.begin(), idx.end(), 0);
      for (int k = 0; k < n_coalitions; ++k) {
        const int s = size_dist(rng);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::uint64_t m = 0;
        for (int t = 0; t < s; ++t) m |= std::uint64_t{1} << idx[t];
        coalitions[m] += 1.0;
      }
    }

    // constrained WLS: phi_{d-1} eliminated via sum(phi) = v(full) - v(empty)
    const int p = d - 1;
    const std::size_t rows = coalitions.size();
    if (static_cast<int>(rows) < p) continue;  // resample
    Eigen::MatrixXd A(rows, p);
    Eigen::VectorXd t(rows);
    std::size_t r = 0;
    for (const auto& [mask, w] : coalitions) {
      const double sw = std::sqrt(w);
      const double zl = (mask >> (d - 1)) & 1 ? 1.0 : 0.0;
      for (int i = 0; i < p; ++i)
        A(r, i) = sw * ((((mask >> i) & 1) ? 1.0 : 0.0) - zl);
      t(r) = sw * (coalition_value(score_fn, background, x, mask) - v_empty - zl * total);
      ++r;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < p) continue;  // degenerate design; resample with next seed
    const Eigen::VectorXd phi_head = qr.solve(t);

    AttributionResult res;
    res.method = AttributionMethod::SampledShapley;
    res.baseline_description =
        "kernel WLS, " + std::to_string(n_coalitions) + " coalitions, background = " +
        std::to_string(background.size()) + " rows";
    res.values.assign(d, 0.0);
    double head_sum = 0.0;
    for (int i = 0; i < p; ++i) {
      res.values[i] = phi_head(i);
      head_sum += phi_head(i);
    }
    res.values[d - 1] = total - head_sum;
    return res;
  }
  throw std::runtime_error("sampled_shapley: degenerate design matrix after 5 attempts");
}

AttributionResult permutation_importance(const ScoreFn& score_fn, const Dataset& ds,
                                         PermutationMetric metric, int n_repeats,
                                         std::uint64_t seed) {
  if (n_repeats < 1) throw std::invalid_argument("permutation_importance: n_repeats >= 1");
  const std::size_t n = ds.size();
  long npos = 0;
  for (const Record& r : ds.records) npos += r.label;
  if (npos == 0 || npos == static_cast<long>(n))
    throw std::invalid_argument("permutation_importance: metric undefined on single class");

  std::vector<int> labels;
  for (const Record& r : ds.records) labels.push_back(r.label);
  auto compute_metric = [&](const std::vector<double>& scores) {
    ScoredSet s{scores, labels};
    return metric == PermutationMetric::Auroc ? auroc(s) : confusion_metrics(s, 0.5).f1;
  };

  std::vector<double> base_scores(n);
  for (std::size_t i = 0; i < n; ++i) base_scores[i] = score_fn(ds.records[i].values);
  const double base = compute_metric(base_scores);

  const int d = static_cast<int>(ds.schema.size());
  AttributionResult res;
  res.method = AttributionMethod::Permutation;
  res.baseline_description = "mean metric drop over " + std::to_string(n_repeats) + " shuffles";
  res.values.assign(d, 0.0);

  std::vector<std::size_t> perm(n);
  std::vector<double> scores(n), values;
  for (int f = 0; f < d; ++f) {
    double drop_sum = 0.0;
    for (int rep = 0; rep < n_repeats; ++rep) {
      std::mt19937_64 rng(seed + 10007ull * static_cast<std::uint64_t>(f) + rep);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < n; ++i) {
        values = ds.records[i].values;
        values[f] = ds.records[perm[i]].values[f];
        scores[i] = score_fn(values);
      }
      drop_sum += base - compute_metric(scores);
    }
    res.values[f] = drop_sum / n_repeats;
  }
  return res;
}

}  // namespace gxai
