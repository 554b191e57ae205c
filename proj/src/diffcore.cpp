#include "gxai/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace gxai::diff {

Mat& ParamSet::add(const std::string& name, int rows, int cols, Init init,
                   std::mt19937_64& rng) {
  if (values_.count(name)) throw std::invalid_argument("ParamSet: duplicate '" + name + "'");
  Mat m(rows, cols);
  if (init == Init::Zeros) {
    m.setZero();
  } else {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  order_.push_back(name);
  return values_[name] = std::move(m);
}

Mat& ParamSet::at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("ParamSet: no parameter '" + name + "'");
  return it->second;
}

const Mat& ParamSet::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("ParamSet: no parameter '" + name + "'");
  return it->second;
}

void ParamSet::check_finite() const {
  for (const auto& [name, m] : values_)
    if (!m.allFinite()) throw std::runtime_error("ParamSet: non-finite entries in '" + name + "'");
}

GradSet GradSet::zeros_like(const ParamSet& params) {
  GradSet g;
  for (const std::string& name : params.names()) {
    g.order_.push_back(name);
    g.values_[name] = Mat::Zero(params.at(name).rows(), params.at(name).cols());
  }
  return g;
}

Mat& GradSet::at(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("GradSet: no entry '" + name + "'");
  return it->second;
}

const Mat& GradSet::at(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("GradSet: no entry '" + name + "'");
  return it->second;
}

void GradSet::check_finite() const {
  for (const auto& [name, m] : values_)
    if (!m.allFinite()) throw std::runtime_error("GradSet: non-finite gradient in '" + name + "'");
}

AdamState::AdamState(const ParamSet& params, AdamConfig cfg) : cfg_(cfg) {
  for (const std::string& name : params.names()) {
    m_[name] = Mat::Zero(params.at(name).rows(), params.at(name).cols());
    v_[name] = Mat::Zero(params.at(name).rows(), params.at(name).cols());
  }
}

void adam_step(ParamSet& params, const GradSet& grads, AdamState& state) {
  grads.check_finite();
  state.step_ += 1;
  const AdamConfig& c = state.cfg_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_));
  for (const std::string& name : params.names()) {
    Mat& p = params.at(name);
    const Mat& g = grads.at(name);
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw std::invalid_argument("adam_step: shape mismatch for '" + name + "'");
    Mat& m = state.m_.at(name);
    Mat& v = state.v_.at(name);
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    const Mat mhat = m / bc1;
    const Mat vhat = v / bc2;
    p.array() -= c.lr * mhat.array() / (vhat.array().sqrt() + c.eps);
  }
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

struct Tape::Node {
  enum class Op {
    Param, Constant, MatMul, Add, AddRow, LeakyRelu, Elu, Sigmoid,
    SoftmaxRows, SoftmaxCols, Dropout, SliceCols, ConcatCols, Scale,
    GatScores, GatherRows, BceLogit
  };
  Op op;
  std::vector<Var> inputs;
  Mat value;
  Mat grad;           // allocated during backward
  bool grad_set = false;
  // op-specific config
  bool trans_a = false, trans_b = false;
  double s0 = 0.0, s1 = 0.0;  // slope / scale / label / pos_weight
  int i0 = 0, i1 = 0;         // slice start / count
  std::vector<int> indices;   // gather
  Mat mask;                   // dropout mask, already scaled
  std::string name;           // param name
};

Tape::Tape(const ParamSet& params) : params_(params) {}
Tape::Tape(Tape&&) noexcept = default;
Tape::~Tape() = default;

std::size_t Tape::node_count() const { return nodes_.size(); }

Tape::Var Tape::push(Node n) {
  if (!n.value.allFinite())
    throw std::runtime_error("Tape: non-finite value at node " +
                             std::to_string(nodes_.size()));
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

const Mat& Tape::value(Var v) const { return nodes_.at(v).value; }

Tape::Var Tape::param(const std::string& name) {
  auto it = param_vars_.find(name);
  if (it != param_vars_.end()) return it->second;
  Node n;
  n.op = Node::Op::Param;
  n.name = name;
  n.value = params_.at(name);
  const Var v = push(std::move(n));
  param_vars_[name] = v;
  return v;
}

Tape::Var Tape::constant(Mat value) {
  Node n;
  n.op = Node::Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::Var Tape::matmul(Var a, Var b, bool trans_a, bool trans_b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  Node n;
  n.op = Node::Op::MatMul;
  n.inputs = {a, b};
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  if (!trans_a && !trans_b) n.value.noalias() = A * B;
  else if (trans_a && !trans_b) n.value.noalias() = A.transpose() * B;
  else if (!trans_a && trans_b) n.value.noalias() = A * B.transpose();
  else n.value.noalias() = A.transpose() * B.transpose();
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Node::Op::Add;
  n.inputs = {a, b};
  n.value = value(a) + value(b);
  return push(std::move(n));
}

Tape::Var Tape::add_row_broadcast(Var x, Var bias_row) {
  const Mat& B = value(bias_row);
  if (B.rows() != 1) throw std::invalid_argument("add_row_broadcast: bias must be 1xc");
  Node n;
  n.op = Node::Op::AddRow;
  n.inputs = {x, bias_row};
  n.value = value(x).rowwise() + B.row(0);
  return push(std::move(n));
}

Tape::Var Tape::leaky_relu(Var x, double slope) {
  Node n;
  n.op = Node::Op::LeakyRelu;
  n.inputs = {x};
  n.s0 = slope;
  n.value = value(x).unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
  return push(std::move(n));
}

Tape::Var Tape::elu(Var x) {
  Node n;
  n.op = Node::Op::Elu;
  n.inputs = {x};
  n.value = value(x).unaryExpr([](double v) { return v >= 0.0 ? v : std::expm1(v); });
  return push(std::move(n));
}

Tape::Var Tape::sigmoid(Var x) {
  Node n;
  n.op = Node::Op::Sigmoid;
  n.inputs = {x};
  n.value = value(x).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(n));
}

static Mat softmax_colwise(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (int c = 0; c < x.cols(); ++c) {
    const double mx = x.col(c).maxCoeff();  // shift for stability
    Eigen::VectorXd e = (x.col(c).array() - mx).exp();
    y.col(c) = e / e.sum();
  }
  return y;
}

Tape::Var Tape::softmax_cols(Var x) {
  Node n;
  n.op = Node::Op::SoftmaxCols;
  n.inputs = {x};
  n.value = softmax_colwise(value(x));
  return push(std::move(n));
}

Tape::Var Tape::softmax_rows(Var x) {
  Node n;
  n.op = Node::Op::SoftmaxRows;
  n.inputs = {x};
  n.value = softmax_colwise(value(x).transpose()).transpose();
  return push(std::move(n));
}

Tape::Var Tape::dropout(Var x, double rate, std::mt19937_64& rng, bool train) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (!train || rate == 0.0) return x;  // identity in eval mode
  Node n;
  n.op = Node::Op::Dropout;
  n.inputs = {x};
  const Mat& X = value(x);
  n.mask.resize(X.rows(), X.cols());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);  // inverted dropout
  for (int r = 0; r < X.rows(); ++r)
    for (int c = 0; c < X.cols(); ++c)
      n.mask(r, c) = u(rng) < rate ? 0.0 : keep_scale;
  n.value = X.cwiseProduct(n.mask);
  return push(std::move(n));
}

Tape::Var Tape::slice_cols(Var x, int start, int count) {
  const Mat& X = value(x);
  if (start < 0 || count <= 0 || start + count > X.cols())
    throw std::invalid_argument("slice_cols: range out of bounds");
  Node n;
  n.op = Node::Op::SliceCols;
  n.inputs = {x};
  n.i0 = start;
  n.i1 = count;
  n.value = X.middleCols(start, count);
  return push(std::move(n));
}

Tape::Var Tape::concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: empty input list");
  int cols = 0;
  const int rows = static_cast<int>(value(xs[0]).rows());
  for (Var v : xs) {
    if (value(v).rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += static_cast<int>(value(v).cols());
  }
  Node n;
  n.op = Node::Op::ConcatCols;
  n.inputs = xs;
  n.value.resize(rows, cols);
  int at = 0;
  for (Var v : xs) {
    n.value.middleCols(at, value(v).cols()) = value(v);
    at += static_cast<int>(value(v).cols());
  }
  return push(std::move(n));
}

Tape::Var Tape::scale(Var x, double c) {
  Node n;
  n.op = Node::Op::Scale;
  n.inputs = {x};
  n.s0 = c;
  n.value = value(x) * c;
  return push(std::move(n));
}

Tape::Var Tape::gatv2_scores(Var left, Var right, Var attn_vec, double slope) {
  const Mat& L = value(left);
  const Mat& R = value(right);
  const Mat& a = value(attn_vec);
  if (L.cols() != R.cols() || a.rows() != L.cols() || a.cols() != 1)
    throw std::invalid_argument("gatv2_scores: shape mismatch");
  const int d = static_cast<int>(L.rows());
  Node n;
  n.op = Node::Op::GatScores;
  n.inputs = {left, right, attn_vec};
  n.s0 = slope;
  n.value.resize(d, d);  // (j, i) = a . LeakyReLU(L_i + R_j)
  Eigen::RowVectorXd t(L.cols());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      t = L.row(i) + R.row(j);
      double s = 0.0;
      for (int k = 0; k < t.size(); ++k)
        s += (t[k] >= 0.0 ? t[k] : slope * t[k]) * a(k, 0);
      n.value(j, i) = s;
    }
  return push(std::move(n));
}

Tape::Var Tape::gather_rows(Var table, std::vector<int> indices) {
  const Mat& T = value(table);
  Node n;
  n.op = Node::Op::GatherRows;
  n.inputs = {table};
  n.indices = std::move(indices);
  n.value.resize(static_cast<int>(n.indices.size()), T.cols());
  for (std::size_t r = 0; r < n.indices.size(); ++r) {
    if (n.indices[r] < 0 || n.indices[r] >= T.rows())
      throw std::invalid_argument("gather_rows: index out of range");
    n.value.row(static_cast<int>(r)) = T.row(n.indices[r]);
  }
  return push(std::move(n));
}

Tape::Var Tape::bce_with_logit(Var logit, double y, double pos_weight) {
  const Mat& Z = value(logit);
  if (Z.rows() != 1 || Z.cols() != 1)
    throw std::invalid_argument("bce_with_logit: logit must be 1x1");
  if (y != 0.0 && y != 1.0) throw std::invalid_argument("bce_with_logit: y must be 0 or 1");
  Node n;
  n.op = Node::Op::BceLogit;
  n.inputs = {logit};
  n.s0 = y;
  n.s1 = pos_weight;
  const double z = Z(0, 0);
  n.value = Mat::Constant(1, 1, y == 1.0 ? pos_weight * softplus(-z) : softplus(z));
  return push(std::move(n));
}

GradSet Tape::backward(Var loss) {
  if (consumed_) throw std::runtime_error("Tape: backward called on a consumed tape");
  consumed_ = true;
  Node& top = nodes_.at(loss);
  if (top.value.rows() != 1 || top.value.cols() != 1)
    throw std::invalid_argument("backward: loss must be 1x1");

  auto grad_of = [this](Var v) -> Mat& {
    Node& n = nodes_[v];
    if (!n.grad_set) {
      n.grad = Mat::Zero(n.value.rows(), n.value.cols());
      n.grad_set = true;
    }
    return n.grad;
  };
  grad_of(loss)(0, 0) = 1.0;

  GradSet out = GradSet::zeros_like(params_);

  for (Var v = loss; v >= 0; --v) {
    Node& n = nodes_[v];
    if (!n.grad_set) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Node::Op::Param:
        out.at(n.name) += g;
        break;
      case Node::Op::Constant:
        break;
      case Node::Op::MatMul: {
        const Mat& A = nodes_[n.inputs[0]].value;
        const Mat& B = nodes_[n.inputs[1]].value;
        Mat dA, dB;
        if (!n.trans_a && !n.trans_b) {
          dA.noalias() = g * B.transpose();
          dB.noalias() = A.transpose() * g;
        } else if (n.trans_a && !n.trans_b) {
          dA.noalias() = B * g.transpose();
          dB.noalias() = A * g;
        } else if (!n.trans_a && n.trans_b) {
          dA.noalias() = g * B;
          dB.noalias() = g.transpose() * A;
        } else {
          dA.noalias() = B.transpose() * g.transpose();
          dB.noalias() = g.transpose() * A.transpose();
        }
        grad_of(n.inputs[0]) += dA;
        grad_of(n.inputs[1]) += dB;
        break;
      }
      case Node::Op::Add:
        grad_of(n.inputs[0]) += g;
        grad_of(n.inputs[1]) += g;
        break;
      case Node::Op::AddRow:
        grad_of(n.inputs[0]) += g;
        grad_of(n.inputs[1]).row(0) += g.colwise().sum();
        break;
      case Node::Op::LeakyRelu: {
        const Mat& X = nodes_[n.inputs[0]].value;
        const double slope = n.s0;
        grad_of(n.inputs[0]) +=
            g.cwiseProduct(X.unaryExpr([slope](double x) { return x >= 0.0 ? 1.0 : slope; }));
        break;
      }
      case Node::Op::Elu:
        // y' = 1 for x>=0, e^x = y+1 for x<0
        grad_of(n.inputs[0]) += g.cwiseProduct(
            n.value.unaryExpr([](double y) { return y >= 0.0 ? 1.0 : y + 1.0; }));
        break;
      case Node::Op::Sigmoid:
        grad_of(n.inputs[0]) += g.cwiseProduct(
            n.value.unaryExpr([](double y) { return y * (1.0 - y); }));
        break;
      case Node::Op::SoftmaxCols: {
        Mat dx(n.value.rows(), n.value.cols());
        for (int c = 0; c < n.value.cols(); ++c) {
          const double dot = n.value.col(c).dot(g.col(c));
          dx.col(c) = n.value.col(c).cwiseProduct((g.col(c).array() - dot).matrix());
        }
        grad_of(n.inputs[0]) += dx;
        break;
      }
      case Node::Op::SoftmaxRows: {
        Mat dx(n.value.rows(), n.value.cols());
        for (int r = 0; r < n.value.rows(); ++r) {
          const double dot = n.value.row(r).dot(g.row(r));
          dx.row(r) = n.value.row(r).cwiseProduct(
              g.row(r) - Eigen::RowVectorXd::Constant(n.value.cols(), dot));
        }
        grad_of(n.inputs[0]) += dx;
        break;
      }
      case Node::Op::Dropout:
        grad_of(n.inputs[0]) += g.cwiseProduct(n.mask);
        break;
      case Node::Op::SliceCols:
        grad_of(n.inputs[0]).middleCols(n.i0, n.i1) += g;
        break;
      case Node::Op::ConcatCols: {
        int at = 0;
        for (Var in : n.inputs) {
          const int w = static_cast<int>(nodes_[in].value.cols());
          grad_of(in) += g.middleCols(at, w);
          at += w;
        }
        break;
      }
      case Node::Op::Scale:
        grad_of(n.inputs[0]) += g * n.s0;
        break;
      case Node::Op::GatScores: {
        const Mat& L = nodes_[n.inputs[0]].value;
        const Mat& R = nodes_[n.inputs[1]].value;
        const Mat& a = nodes_[n.inputs[2]].value;
        const double slope = n.s0;
        Mat dL = Mat::Zero(L.rows(), L.cols());
        Mat dR = Mat::Zero(R.rows(), R.cols());
        Mat da = Mat::Zero(a.rows(), 1);
        const int d = static_cast<int>(L.rows());
        Eigen::RowVectorXd t(L.cols()), u(L.cols()), m(L.cols());
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            const double gs = g(j, i);
            if (gs == 0.0) continue;
            t = L.row(i) + R.row(j);
            for (int k = 0; k < t.size(); ++k) {
              u[k] = t[k] >= 0.0 ? t[k] : slope * t[k];
              m[k] = t[k] >= 0.0 ? 1.0 : slope;
            }
            const Eigen::RowVectorXd common = gs * m.cwiseProduct(a.col(0).transpose());
            dL.row(i) += common;
            dR.row(j) += common;
            da.col(0) += gs * u.transpose();
          }
        grad_of(n.inputs[0]) += dL;
        grad_of(n.inputs[1]) += dR;
        grad_of(n.inputs[2]) += da;
        break;
      }
      case Node::Op::GatherRows: {
        Mat& dT = grad_of(n.inputs[0]);
        for (std::size_t r = 0; r < n.indices.size(); ++r)
          dT.row(n.indices[r]) += g.row(static_cast<int>(r));
        break;
      }
      case Node::Op::BceLogit: {
        const double z = nodes_[n.inputs[0]].value(0, 0);
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double dz = n.s0 == 1.0 ? n.s1 * (p - 1.0) : p;
        grad_of(n.inputs[0])(0, 0) += g(0, 0) * dz;
        break;
      }
    }
  }
  out.check_finite();
  return out;
}

double finite_diff_check(ParamSet& params,
                         const std::function<double(const ParamSet&)>& loss_fn,
                         const GradSet& analytic, double eps, int sample_above,
                         int min_sample, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 1e-2))
    throw std::invalid_argument("finite_diff_check: eps must be in (0, 1e-2]");

  std::vector<std::tuple<std::string, int, int>> entries;
  for (const std::string& name : params.names()) {
    const Mat& p = params.at(name);
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c) entries.push_back({name, r, c});
  }
  if (sample_above > 0 && static_cast<int>(entries.size()) > sample_above) {
    std::mt19937_64 rng(seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(std::max(min_sample, 0));
  }

  double max_rel = 0.0;
  for (const auto& [name, r, c] : entries) {
    double& slot = params.at(name)(r, c);
    const double orig = slot;
    slot = orig + eps;
    const double up = loss_fn(params);
    slot = orig - eps;
    const double down = loss_fn(params);
    slot = orig;
    const double g_fd = (up - down) / (2.0 * eps);
    const double g = analytic.at(name)(r, c);
    const double rel = std::abs(g - g_fd) / std::max({std::abs(g), std::abs(g_fd), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace gxai::diff
