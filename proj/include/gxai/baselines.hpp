#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gxai/schema.hpp"

namespace gxai {

/// L2-regularized, class-weighted logistic regression over the one-hot
/// expanded feature space (binary -> raw column, continuous -> z-scored
/// column, categorical -> one-hot block).
struct LogisticModel {
  FeatureSchema schema;
  NormalizationStats stats;
  std::vector<std::pair<int, int>> expansion;  // per feature: (column offset, width)
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l2_lambda = 0.0;

  Eigen::VectorXd expand(const std::vector<double>& values) const;
  double predict(const std::vector<double>& values) const;
  double predict_record(const Record& r) const { return predict(r.values); }
  /// |w| summed over each feature's expansion columns; schema order.
  std::vector<double> feature_weight_magnitudes() const;
};

/// Deterministic full-batch gradient descent with backtracking line search
/// on the class-weighted NLL + (lambda/2)||w||^2 (bias unpenalized).
/// Class weights n/(2 n_c). Stops at gradient norm < 1e-6 or max_iters.
LogisticModel train_logistic(const Dataset& train, double l2_lambda = 1e-3,
                             int max_iters = 1000);

using ScoreFn = std::function<double(const std::vector<double>&)>;

enum class AttributionMethod { ExactShapley, SampledShapley, Permutation };

struct AttributionResult {
  std::vector<double> values;  // schema order, one value per original feature
  AttributionMethod method = AttributionMethod::ExactShapley;
  std::string baseline_description;
};

/// Exact interventional Shapley values by full coalition enumeration;
/// coalition value = mean over background rows of score_fn with
/// out-of-coalition features replaced from the background row. d <= d_max.
AttributionResult exact_shapley(const ScoreFn& score_fn, const Dataset& background,
                                const std::vector<double>& x, int d_max = 12);

/// Kernel-weighted least-squares Shapley estimate over seeded coalition
/// samples, efficiency enforced by a constrained fit. With n_coalitions >=
/// 2^d all coalitions are enumerated and the result is exact.
AttributionResult sampled_shapley(const ScoreFn& score_fn, const Dataset& background,
                                  const std::vector<double>& x, int n_coalitions,
                                  std::uint64_t seed);

enum class PermutationMetric { Auroc, F1 };

/// Mean metric drop over n_repeats seeded shuffles of each feature column.
AttributionResult permutation_importance(const ScoreFn& score_fn, const Dataset& ds,
                                         PermutationMetric metric, int n_repeats,
                                         std::uint64_t seed);

}  // namespace gxai
