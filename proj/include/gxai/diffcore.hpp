#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gxai::diff {

using Mat = Eigen::MatrixXd;

enum class Init { GlorotUniform, Zeros };

/// Named dense parameters with deterministic seeded initialization.
/// Insertion order is stable and shared with GradSet/AdamState.
class ParamSet {
 public:
  Mat& add(const std::string& name, int rows, int cols, Init init,
           std::mt19937_64& rng);
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  const std::vector<std::string>& names() const { return order_; }
  void check_finite() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, Mat> values_;
};

class GradSet {
 public:
  static GradSet zeros_like(const ParamSet& params);
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  void check_finite() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, Mat> values_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second-moment accumulators plus step counter for the
/// bias-corrected adaptive-moment update.
class AdamState {
 public:
  AdamState(const ParamSet& params, AdamConfig cfg);
  long step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  friend void adam_step(ParamSet&, const GradSet&, AdamState&);
  AdamConfig cfg_;
  std::map<std::string, Mat> m_, v_;
  long step_ = 0;
};

void adam_step(ParamSet& params, const GradSet& grads, AdamState& state);

/// Reverse-mode tape over dense matrices. Build a forward graph by calling
/// op methods, then call backward(loss) once; the tape is consumed by
/// backward and rejects reuse. Every op validates that its output is finite
/// and reports the offending node otherwise.
class Tape {
 public:
  using Var = int;

  explicit Tape(const ParamSet& params);
  Tape(Tape&&) noexcept;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  Var param(const std::string& name);  // memoized per name
  Var constant(Mat value);

  Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
  Var add(Var a, Var b);
  Var add_row_broadcast(Var x, Var bias_row);  // bias 1xc added to every row
  Var leaky_relu(Var x, double slope = 0.2);
  Var elu(Var x);
  Var sigmoid(Var x);
  Var softmax_rows(Var x);
  Var softmax_cols(Var x);
  Var dropout(Var x, double rate, std::mt19937_64& rng, bool train);
  Var slice_cols(Var x, int start, int count);
  Var concat_cols(const std::vector<Var>& xs);
  Var scale(Var x, double c);

  /// GATv2 scores: inputs L, R (d x k rows = W_left h_i, W_right h_j) and
  /// attention vector a (k x 1); output S with S(j,i) = a . LeakyReLU(L_i + R_j).
  Var gatv2_scores(Var left, Var right, Var attn_vec, double slope = 0.2);

  Var gather_rows(Var table, std::vector<int> indices);

  /// Numerically stable class-weighted binary cross-entropy on a 1x1 logit:
  /// y=1 -> pos_weight * softplus(-z), y=0 -> softplus(z).
  Var bce_with_logit(Var logit, double y, double pos_weight);

  const Mat& value(Var v) const;
  std::size_t node_count() const;

  /// Reverse pass from a 1x1 loss node; consumes the tape.
  GradSet backward(Var loss);

 private:
  struct Node;
  Var push(Node n);
  const ParamSet& params_;
  std::vector<Node> nodes_;
  std::map<std::string, Var> param_vars_;
  bool consumed_ = false;
};

/// Central-difference check of `analytic` against `loss_fn` over every
/// parameter entry, or a seeded subsample of at least `min_sample` entries
/// when the model is larger than `sample_above`. Returns the max relative
/// error with denominator max(|g|, |g_fd|, 1e-8).
double finite_diff_check(ParamSet& params,
                         const std::function<double(const ParamSet&)>& loss_fn,
                         const GradSet& analytic, double eps,
                         int sample_above = 0, int min_sample = 200,
                         std::uint64_t seed = 0);

}  // namespace gxai::diff
