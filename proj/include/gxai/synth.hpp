#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gxai/schema.hpp"

namespace gxai {

/// Marginal feature distribution of the generator: binary -> Bernoulli(p),
/// continuous -> Uniform[lo, hi). Features are sampled independently.
struct FeatureDist {
  FeatureKind kind = FeatureKind::Binary;
  double p = 0.5;             // binary
  double lo = 0.0, hi = 1.0;  // continuous

  double mean() const;
  void validate() const;
};

/// Generative model with planted linear weights and sparse pairwise
/// interactions: logit z = bias + sum w_j x_j + sum U_{jk} x_j x_k,
/// label ~ Bernoulli(sigmoid(z)). Serves as the explanation oracle in
/// place of the restricted clinical data.
struct GroundTruthModel {
  double bias = 0.0;
  std::vector<double> linear_weights;
  std::map<std::pair<int, int>, double> interaction_weights;  // key (j,k), j<k
  std::vector<FeatureDist> feature_dists;
  std::vector<int> stage_tags;            // 1..4 per feature
  std::vector<std::string> feature_names; // empty -> f0, f1, ...
  std::string label_name = "label";

  std::size_t dim() const { return linear_weights.size(); }
  void validate() const;
  double logit(const std::vector<double>& x) const;
  FeatureSchema make_schema() const;
};

struct GroundTruth {
  GroundTruthModel model;
  // nonzero interaction pairs ordered by |weight| descending (index tie-break)
  std::vector<std::pair<int, int>> planted_interaction_ranking;
  double bayes_auroc = 0.5;
};

GroundTruthModel load_ground_truth(const std::string& path);
void save_ground_truth(const GroundTruthModel& gt, const std::string& path);

Dataset generate_dataset(const GroundTruthModel& gt, int n, std::uint64_t seed);

/// Exact interventional Shapley values of the logit z(.) at x, baseline =
/// expectation under the independent feature distributions, by full
/// coalition enumeration with closed-form expectations. d <= 16.
std::vector<double> oracle_shapley(const GroundTruthModel& gt,
                                   const std::vector<double>& x);

double sigmoid(double z);

/// Monte-Carlo AUROC of the true conditional probability as a scorer;
/// upper-bounds any learned model's achievable AUROC in expectation.
double bayes_auroc(const GroundTruthModel& gt, int n_mc, std::uint64_t seed);

/// Same, but the scorer only sees features with stage <= max_stage (their
/// contribution to z; labels still drawn from the full model). Used to
/// compute oracle gaps between incremental feature stages.
double bayes_auroc_staged(const GroundTruthModel& gt, int max_stage, int n_mc,
                          std::uint64_t seed);

GroundTruth make_ground_truth(const GroundTruthModel& gt, int n_mc,
                              std::uint64_t seed);

}  // namespace gxai
