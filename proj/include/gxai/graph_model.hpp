#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gxai/diffcore.hpp"
#include "gxai/schema.hpp"

namespace gxai {

enum class AttentionVariant { Gatv2, DotProduct };

std::string attention_variant_name(AttentionVariant v);
AttentionVariant attention_variant_from_name(const std::string& name);

struct GraphConfig {
  AttentionVariant variant = AttentionVariant::Gatv2;
  int embed_dim = 8;      // feature-identity embedding width
  int cat_embed_dim = 8;  // learned per-category value embedding width
  int hidden_dim = 64;
  int head_count = 4;     // dot_product only; must divide hidden_dim
  double dropout = 0.3;
  double leaky_slope = 0.2;
};

struct TrainConfig {
  int batch_size = 256;
  int max_epochs = 50;
  int patience = 5;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

/// Fully connected directed feature graph for one record: d nodes, d^2
/// directed edges including self-loops. node_inputs row i is the
/// concatenation of feature i's identity embedding and its value encoding.
struct FeatureGraph {
  int node_count = 0;
  Eigen::MatrixXd node_inputs;
  long edge_count() const { return static_cast<long>(node_count) * node_count; }
};

/// Intrinsic explanation from one forward pass: node importance beta
/// (simplex), edge interaction importance intimp(j,i) = alpha_ji * beta_i
/// (sums to 1 over all d^2 entries), and the predicted probability.
struct Explanation {
  Eigen::VectorXd featimp;
  Eigen::MatrixXd intimp;
  double predicted_probability = 0.0;

  int dim() const { return static_cast<int>(featimp.size()); }
  void check_invariants(double tol = 1e-6) const;
};

struct TrainLog {
  std::vector<double> val_auroc_per_epoch;
  int best_epoch = -1;
  double best_val_auroc = 0.0;
};

class GraphModel {
 public:
  /// Fresh model with seeded initialization against a schema + train stats.
  GraphModel(FeatureSchema schema, NormalizationStats stats, GraphConfig cfg,
             std::uint64_t init_seed);

  FeatureGraph build_feature_graph(const Record& record) const;

  double predict(const Record& record) const;
  std::vector<double> predict_batch(const Dataset& ds) const;
  Explanation explain(const Record& record) const;

  /// Minibatch training of class-weighted BCE with early stopping on
  /// validation AUROC; returns the best-validation checkpoint.
  static GraphModel train(const Dataset& train, const Dataset& val,
                          GraphConfig cfg, TrainConfig tcfg,
                          TrainLog* log = nullptr);

  /// Mean weighted BCE over the given record indices; the returned tape is
  /// the backward cache. Exposed for the gradient-check harness.
  std::pair<double, diff::Tape> forward_loss(const Dataset& ds,
                                             const std::vector<int>& indices,
                                             double pos_weight, bool train_mode,
                                             std::uint64_t dropout_seed) const;

  const FeatureSchema& schema() const { return schema_; }
  const GraphConfig& config() const { return cfg_; }
  diff::ParamSet& params() { return params_; }
  const diff::ParamSet& params() const { return params_; }

  void save(const std::string& path) const;
  static GraphModel load(const std::string& path);

 private:
  struct ForwardRecord {
    diff::Tape::Var logit;
    Eigen::MatrixXd alpha;  // (j,i), column-stochastic
    Eigen::VectorXd beta;
  };
  ForwardRecord run_record(diff::Tape& tape, const Record& record,
                           bool train_mode, std::mt19937_64* dropout_rng) const;

  FeatureSchema schema_;
  NormalizationStats stats_;
  GraphConfig cfg_;
  diff::ParamSet params_;
  int value_width_ = 1;
};

/// alpha_ji = intimp_ji / featimp_i: fraction of destination i's
/// contribution originating from source j. Throws when featimp_i == 0.
double interaction_proportion(const Explanation& expl, int source, int dest);

struct EdgeImportance {
  int source = 0;
  int dest = 0;
  double value = 0.0;
};

/// k largest intimp entries, descending; ties broken by (source, dest).
std::vector<EdgeImportance> top_k_edges(const Explanation& expl, int k,
                                        bool exclude_self_loops);

struct AggregateExplanation {
  Eigen::VectorXd mean_node_importance;
  Eigen::VectorXd mean_outward_edge;  // mean of sum_{i != j} intimp(j,i)
  Eigen::MatrixXd mean_intimp;
};

AggregateExplanation aggregate_explanations(const std::vector<Explanation>& expls);

/// Figure-style DOT export: node label "name\nbeta%", node size scaled by
/// beta, edges restricted to top-k intimp, edge labels in percent.
std::string explanation_to_dot(const Explanation& expl, const FeatureSchema& schema,
                               int k, bool exclude_self_loops = true);

void write_explanation_json(const Explanation& expl, const FeatureSchema& schema,
                            const std::string& path);

}  // namespace gxai
