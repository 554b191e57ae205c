#include "gxai/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gxai/metrics.hpp"

namespace gxai {

using diff::Mat;
using diff::Tape;
using nlohmann::json;

std::string attention_variant_name(AttentionVariant v) {
  return v == AttentionVariant::Gatv2 ? "gatv2" : "dot_product";
}

AttentionVariant attention_variant_from_name(const std::string& name) {
  if (name == "gatv2") return AttentionVariant::Gatv2;
  if (name == "dot_product") return AttentionVariant::DotProduct;
  throw std::invalid_argument("unknown attention variant: " + name);
}

void Explanation::check_invariants(double tol) const {
  const int d = dim();
  if (intimp.rows() != d || intimp.cols() != d)
    throw std::runtime_error("Explanation: intimp shape mismatch");
  double beta_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    if (featimp(i) < 0.0) throw std::runtime_error("Explanation: negative featimp");
    beta_sum += featimp(i);
  }
  if (std::abs(beta_sum - 1.0) > tol)
    throw std::runtime_error("Explanation: featimp does not sum to 1");
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    double col = 0.0;
    for (int j = 0; j < d; ++j) {
      if (intimp(j, i) < 0.0) throw std::runtime_error("Explanation: negative intimp");
      col += intimp(j, i);
    }
    if (std::abs(col - featimp(i)) > tol)
      throw std::runtime_error("Explanation: intimp column inconsistent with featimp");
    total += col;
  }
  if (std::abs(total - 1.0) > tol)
    throw std::runtime_error("Explanation: intimp does not sum to 1");
}

namespace {

struct CatFeature {
  int node = 0;
  std::string param_name;
  int cardinality = 0;
};

std::vector<CatFeature> categorical_features(const FeatureSchema& schema) {
  std::vector<CatFeature> cats;
  for (std::size_t c = 0; c < schema.size(); ++c)
    if (schema.features[c].kind == FeatureKind::Categorical)
      cats.push_back({static_cast<int>(c), "cat:" + schema.features[c].name,
                      schema.features[c].cardinality});
  return cats;
}

}  // namespace

GraphModel::GraphModel(FeatureSchema schema, NormalizationStats stats,
                       GraphConfig cfg, std::uint64_t init_seed)
    : schema_(std::move(schema)), stats_(std::move(stats)), cfg_(cfg) {
  schema_.validate();
  if (schema_.size() == 0) throw std::invalid_argument("GraphModel: empty schema");
  if (cfg_.hidden_dim % cfg_.head_count != 0)
    throw std::invalid_argument("GraphModel: head_count must divide hidden_dim");

  const std::vector<CatFeature> cats = categorical_features(schema_);
  value_width_ = cats.empty() ? 1 : cfg_.cat_embed_dim;
  const int d = static_cast<int>(schema_.size());
  const int in_dim = cfg_.embed_dim + value_width_;
  const int h = cfg_.hidden_dim;

  std::mt19937_64 rng(init_seed);
  auto& P = params_;
  P.add("embed", d, cfg_.embed_dim, diff::Init::GlorotUniform, rng);
  for (const CatFeature& c : cats)
    P.add(c.param_name, c.cardinality, value_width_, diff::Init::GlorotUniform, rng);
  P.add("enc1_w", h, in_dim, diff::Init::GlorotUniform, rng);
  P.add("enc1_b", 1, h, diff::Init::Zeros, rng);
  P.add("enc2_w", h, h, diff::Init::GlorotUniform, rng);
  P.add("enc2_b", 1, h, diff::Init::Zeros, rng);
  if (cfg_.variant == AttentionVariant::Gatv2) {
    P.add("att_wl", h, h, diff::Init::GlorotUniform, rng);
    P.add("att_wr", h, h, diff::Init::GlorotUniform, rng);
    P.add("att_a", h, 1, diff::Init::GlorotUniform, rng);
  } else {
    P.add("att_wq", h, h, diff::Init::GlorotUniform, rng);
    P.add("att_wk", h, h, diff::Init::GlorotUniform, rng);
    P.add("att_wv", h, h, diff::Init::GlorotUniform, rng);
  }
  P.add("gate_w", 1, h, diff::Init::GlorotUniform, rng);
  P.add("gate_b", 1, 1, diff::Init::Zeros, rng);
  P.add("head1_w", 32, h, diff::Init::GlorotUniform, rng);
  P.add("head1_b", 1, 32, diff::Init::Zeros, rng);
  P.add("head2_w", 1, 32, diff::Init::GlorotUniform, rng);
  P.add("head2_b", 1, 1, diff::Init::Zeros, rng);
}

FeatureGraph GraphModel::build_feature_graph(const Record& record) const {
  const int d = static_cast<int>(schema_.size());
  if (static_cast<int>(record.values.size()) != d)
    throw std::invalid_argument("build_feature_graph: record width mismatch");
  FeatureGraph g;
  g.node_count = d;
  g.node_inputs.resize(d, cfg_.embed_dim + value_width_);
  g.node_inputs.leftCols(cfg_.embed_dim) = params_.at("embed");
  g.node_inputs.rightCols(value_width_).setZero();
  for (int c = 0; c < d; ++c) {
    const FeatureSpec& f = schema_.features[c];
    switch (f.kind) {
      case FeatureKind::Binary:
        g.node_inputs(c, cfg_.embed_dim) = record.values[c];
        break;
      case FeatureKind::Continuous: {
        auto it = stats_.mean_sd.find(c);
        const double mean = it != stats_.mean_sd.end() ? it->second.first : 0.0;
        const double sd = it != stats_.mean_sd.end() ? it->second.second : 1.0;
        g.node_inputs(c, cfg_.embed_dim) = encode_continuous(record.values[c], mean, sd);
        break;
      }
      case FeatureKind::Categorical: {
        const int cat = static_cast<int>(record.values[c]);
        g.node_inputs.row(c).tail(value_width_) =
            params_.at("cat:" + f.name).row(cat);
        break;
      }
    }
  }
  return g;
}

GraphModel::ForwardRecord GraphModel::run_record(Tape& tape, const Record& record,
                                                 bool train_mode,
                                                 std::mt19937_64* dropout_rng) const {
  const int d = static_cast<int>(schema_.size());
  if (static_cast<int>(record.values.size()) != d)
    throw std::invalid_argument("run_record: record width mismatch");

  // node value encodings: scalar column for binary/continuous, learned
  // embedding rows for categoricals (routed through gather so gradients
  // reach the tables)
  Mat base = Mat::Zero(d, value_width_);
  std::vector<std::pair<int, Tape::Var>> cat_rows;
  for (int c = 0; c < d; ++c) {
    const FeatureSpec& f = schema_.features[c];
    if (f.kind == FeatureKind::Binary) {
      base(c, 0) = record.values[c];
    } else if (f.kind == FeatureKind::Continuous) {
      auto it = stats_.mean_sd.find(c);
      const double mean = it != stats_.mean_sd.end() ? it->second.first : 0.0;
      const double sd = it != stats_.mean_sd.end() ? it->second.second : 1.0;
      base(c, 0) = encode_continuous(record.values[c], mean, sd);
    } else {
      const Tape::Var row = tape.gather_rows(
          tape.param("cat:" + f.name), {static_cast<int>(record.values[c])});
      cat_rows.push_back({c, row});
    }
  }
  Tape::Var venc = tape.constant(std::move(base));
  for (const auto& [node, row] : cat_rows) {
    Mat sel = Mat::Zero(d, 1);
    sel(node, 0) = 1.0;
    venc = tape.add(venc, tape.matmul(tape.constant(std::move(sel)), row));
  }

  const Tape::Var X = tape.concat_cols({tape.param("embed"), venc});

  // node encoder: in -> 64 -> 64
  Tape::Var h0 = tape.leaky_relu(
      tape.add_row_broadcast(tape.matmul(X, tape.param("enc1_w"), false, true),
                             tape.param("enc1_b")),
      cfg_.leaky_slope);
  if (train_mode)
    h0 = tape.dropout(h0, cfg_.dropout, *dropout_rng, true);
  const Tape::Var H = tape.add_row_broadcast(
      tape.matmul(h0, tape.param("enc2_w"), false, true), tape.param("enc2_b"));

  Tape::Var Hp;
  Mat alpha;
  if (cfg_.variant == AttentionVariant::Gatv2) {
    const Tape::Var L = tape.matmul(H, tape.param("att_wl"), false, true);
    const Tape::Var R = tape.matmul(H, tape.param("att_wr"), false, true);
    const Tape::Var S = tape.gatv2_scores(L, R, tape.param("att_a"), cfg_.leaky_slope);
    const Tape::Var A = tape.softmax_cols(S);
    alpha = tape.value(A);
    Hp = tape.elu(tape.matmul(A, R, true, false));  // h'_i = sum_j alpha_ji W_right h_j
  } else {
    const Tape::Var Q = tape.matmul(H, tape.param("att_wq"), false, true);
    const Tape::Var K = tape.matmul(H, tape.param("att_wk"), false, true);
    const Tape::Var V = tape.matmul(H, tape.param("att_wv"), false, true);
    const int dk = cfg_.hidden_dim / cfg_.head_count;
    std::vector<Tape::Var> heads;
    alpha = Mat::Zero(d, d);
    for (int h = 0; h < cfg_.head_count; ++h) {
      const Tape::Var Qh = tape.slice_cols(Q, h * dk, dk);
      const Tape::Var Kh = tape.slice_cols(K, h * dk, dk);
      const Tape::Var Vh = tape.slice_cols(V, h * dk, dk);
      const Tape::Var M =
          tape.scale(tape.matmul(Qh, Kh, false, true), 1.0 / std::sqrt(dk));
      const Tape::Var Ah = tape.softmax_rows(M);  // row i: weights over sources j
      alpha += tape.value(Ah).transpose();
      heads.push_back(tape.matmul(Ah, Vh));
    }
    alpha /= static_cast<double>(cfg_.head_count);
    Hp = tape.concat_cols(heads);
  }

  // global attention pooling
  const Tape::Var gate = tape.add_row_broadcast(
      tape.matmul(Hp, tape.param("gate_w"), false, true), tape.param("gate_b"));
  const Tape::Var B = tape.softmax_cols(gate);  // d x 1 simplex
  const Tape::Var g = tape.matmul(B, Hp, true, false);

  Tape::Var h1 = tape.leaky_relu(
      tape.add_row_broadcast(tape.matmul(g, tape.param("head1_w"), false, true),
                             tape.param("head1_b")),
      cfg_.leaky_slope);
  if (train_mode)
    h1 = tape.dropout(h1, cfg_.dropout, *dropout_rng, true);
  const Tape::Var z = tape.add_row_broadcast(
      tape.matmul(h1, tape.param("head2_w"), false, true), tape.param("head2_b"));

  ForwardRecord fr;
  fr.logit = z;
  fr.alpha = std::move(alpha);
  fr.beta = tape.value(B).col(0);
  return fr;
}

double GraphModel::predict(const Record& record) const {
  Tape tape(params_);
  const ForwardRecord fr = run_record(tape, record, false, nullptr);
  return 1.0 / (1.0 + std::exp(-tape.value(fr.logit)(0, 0)));
}

std::vector<double> GraphModel::predict_batch(const Dataset& ds) const {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const Record& r : ds.records) out.push_back(predict(r));
  return out;
}

Explanation GraphModel::explain(const Record& record) const {
  Tape tape(params_);
  const ForwardRecord fr = run_record(tape, record, false, nullptr);
  Explanation e;
  e.predicted_probability = 1.0 / (1.0 + std::exp(-tape.value(fr.logit)(0, 0)));
  e.featimp = fr.beta;
  const int d = static_cast<int>(fr.beta.size());
  e.intimp.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) e.intimp(j, i) = fr.alpha(j, i) * fr.beta(i);
  return e;
}

std::pair<double, Tape> GraphModel::forward_loss(const Dataset& ds,
                                                 const std::vector<int>& indices,
                                                 double pos_weight, bool train_mode,
                                                 std::uint64_t dropout_seed) const {
  if (indices.empty()) throw std::invalid_argument("forward_loss: empty batch");
  Tape tape(params_);
  std::mt19937_64 dropout_rng(dropout_seed);
  Tape::Var total = -1;
  for (int idx : indices) {
    const Record& r = ds.records.at(idx);
    const ForwardRecord fr = run_record(tape, r, train_mode, &dropout_rng);
    const Tape::Var lv =
        tape.bce_with_logit(fr.logit, static_cast<double>(r.label), pos_weight);
    total = total < 0 ? lv : tape.add(total, lv);
  }
  const Tape::Var loss = tape.scale(total, 1.0 / static_cast<double>(indices.size()));
  const double loss_value = tape.value(loss)(0, 0);
  return {loss_value, std::move(tape)};
}

GraphModel GraphModel::train(const Dataset& train, const Dataset& val,
                             GraphConfig cfg, TrainConfig tcfg, TrainLog* log) {
  if (train.size() == 0) throw std::invalid_argument("train: empty training set");
  if (val.size() == 0) throw std::invalid_argument("train: empty validation set");
  long pos = 0;
  for (const Record& r : train.records) pos += r.label;
  const long neg = static_cast<long>(train.size()) - pos;
  if (pos == 0) throw std::invalid_argument("train: no positive examples");
  const double pos_weight = static_cast<double>(neg) / static_cast<double>(pos);

  GraphModel model(train.schema, train.stats.value_or(NormalizationStats{}), cfg,
                   tcfg.seed);
  diff::AdamConfig acfg;
  acfg.lr = tcfg.lr;
  diff::AdamState adam(model.params_, acfg);

  std::mt19937_64 shuffle_rng(tcfg.seed ^ 0x5deece66dull);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  diff::ParamSet best_params = model.params_;
  double best_auroc = -1.0;
  int best_epoch = -1;
  int since_best = 0;

  for (int epoch = 0; epoch < tcfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    int batch_id = 0;
    for (std::size_t at = 0; at < order.size(); at += tcfg.batch_size, ++batch_id) {
      const std::size_t end = std::min(order.size(), at + tcfg.batch_size);
      const std::vector<int> batch(order.begin() + at, order.begin() + end);
      const std::uint64_t dseed =
          tcfg.seed * 1000003ull + static_cast<std::uint64_t>(epoch) * 131ull + batch_id;
      auto [loss, tape] = model.forward_loss(train, batch, pos_weight, true, dseed);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch));
      Tape::Var loss_var = static_cast<Tape::Var>(tape.node_count() - 1);
      diff::GradSet grads = tape.backward(loss_var);
      diff::adam_step(model.params_, grads, adam);
    }

    ScoredSet vs;
    vs.scores = model.predict_batch(val);
    for (const Record& r : val.records) vs.labels.push_back(r.label);
    const double va = auroc(vs);
    if (log) log->val_auroc_per_epoch.push_back(va);
    if (va > best_auroc) {
      best_auroc = va;
      best_epoch = epoch;
      best_params = model.params_;
      since_best = 0;
    } else if (++since_best >= tcfg.patience) {
      break;
    }
  }

  model.params_ = best_params;
  if (log) {
    log->best_epoch = best_epoch;
    log->best_val_auroc = best_auroc;
  }
  return model;
}

// ---------------------------------------------------------------------------
// checkpoint io

void GraphModel::save(const std::string& path) const {
  json params = json::object();
  for (const std::string& name : params_.names()) {
    const Mat& m = params_.at(name);
    std::vector<double> data;
    data.reserve(m.size());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    params[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
  }
  json stats = json::array();
  for (const auto& [idx, ms] : stats_.mean_sd)
    stats.push_back({{"index", idx}, {"mean", ms.first}, {"sd", ms.second}});
  json feats = json::array();
  for (const FeatureSpec& f : schema_.features) {
    json jf = {{"name", f.name}, {"kind", feature_kind_name(f.kind)}, {"stage", f.stage}};
    if (f.kind == FeatureKind::Categorical) jf["cardinality"] = f.cardinality;
    feats.push_back(jf);
  }
  const json j = {
      {"kind", "graph_model"},
      {"variant", attention_variant_name(cfg_.variant)},
      {"config",
       {{"embed_dim", cfg_.embed_dim},
        {"cat_embed_dim", cfg_.cat_embed_dim},
        {"hidden_dim", cfg_.hidden_dim},
        {"head_count", cfg_.head_count},
        {"dropout", cfg_.dropout},
        {"leaky_slope", cfg_.leaky_slope}}},
      {"schema", {{"label", schema_.label_name}, {"features", feats}}},
      {"schema_hash", schema_hash(schema_)},
      {"stats", stats},
      {"params", params}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

GraphModel GraphModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  in >> j;
  if (j.value("kind", "") != "graph_model")
    throw std::runtime_error("not a graph model checkpoint: " + path);

  FeatureSchema schema;
  schema.label_name = j.at("schema").at("label").get<std::string>();
  for (const json& jf : j.at("schema").at("features")) {
    FeatureSpec f;
    f.name = jf.at("name").get<std::string>();
    f.kind = feature_kind_from_name(jf.at("kind").get<std::string>());
    f.stage = jf.at("stage").get<int>();
    if (f.kind == FeatureKind::Categorical) f.cardinality = jf.at("cardinality").get<int>();
    schema.features.push_back(f);
  }
  if (schema_hash(schema) != j.at("schema_hash").get<std::uint64_t>())
    throw std::runtime_error("checkpoint schema hash mismatch: " + path);

  NormalizationStats stats;
  for (const json& js : j.at("stats"))
    stats.mean_sd[js.at("index").get<int>()] = {js.at("mean").get<double>(),
                                                js.at("sd").get<double>()};
  GraphConfig cfg;
  cfg.variant = attention_variant_from_name(j.at("variant").get<std::string>());
  const json& jc = j.at("config");
  cfg.embed_dim = jc.at("embed_dim").get<int>();
  cfg.cat_embed_dim = jc.at("cat_embed_dim").get<int>();
  cfg.hidden_dim = jc.at("hidden_dim").get<int>();
  cfg.head_count = jc.at("head_count").get<int>();
  cfg.dropout = jc.at("dropout").get<double>();
  cfg.leaky_slope = jc.at("leaky_slope").get<double>();

  GraphModel model(schema, stats, cfg, 0);
  for (const std::string& name : model.params_.names()) {
    const json& jp = j.at("params").at(name);
    Mat& m = model.params_.at(name);
    if (jp.at("rows").get<int>() != m.rows() || jp.at("cols").get<int>() != m.cols())
      throw std::runtime_error("checkpoint parameter shape mismatch: " + name);
    const std::vector<double> data = jp.at("data").get<std::vector<double>>();
    std::size_t at = 0;
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = data[at++];
  }
  return model;
}

// ---------------------------------------------------------------------------
// explanation utilities

double interaction_proportion(const Explanation& expl, int source, int dest) {
  const int d = expl.dim();
  if (source < 0 || source >= d || dest < 0 || dest >= d)
    throw std::invalid_argument("interaction_proportion: index out of range");
  if (expl.featimp(dest) == 0.0)
    throw std::runtime_error("interaction_proportion: destination importance is zero");
  return expl.intimp(source, dest) / expl.featimp(dest);
}

std::vector<EdgeImportance> top_k_edges(const Explanation& expl, int k,
                                        bool exclude_self_loops) {
  const int d = expl.dim();
  const long max_k = exclude_self_loops ? static_cast<long>(d) * d - d
                                        : static_cast<long>(d) * d;
  if (k < 1 || k > max_k) throw std::invalid_argument("top_k_edges: k out of range");
  std::vector<EdgeImportance> edges;
  edges.reserve(static_cast<std::size_t>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      if (exclude_self_loops && i == j) continue;
      edges.push_back({j, i, expl.intimp(j, i)});
    }
  std::sort(edges.begin(), edges.end(), [](const EdgeImportance& a, const EdgeImportance& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.source != b.source) return a.source < b.source;
    return a.dest < b.dest;
  });
  edges.resize(k);
  return edges;
}

AggregateExplanation aggregate_explanations(const std::vector<Explanation>& expls) {
  if (expls.empty()) throw std::invalid_argument("aggregate_explanations: empty list");
  const int d = expls.front().dim();
  AggregateExplanation agg;
  agg.mean_node_importance = Eigen::VectorXd::Zero(d);
  agg.mean_outward_edge = Eigen::VectorXd::Zero(d);
  agg.mean_intimp = Eigen::MatrixXd::Zero(d, d);
  for (const Explanation& e : expls) {
    if (e.dim() != d) throw std::invalid_argument("aggregate_explanations: dim mismatch");
    agg.mean_node_importance += e.featimp;
    agg.mean_intimp += e.intimp;
    for (int j = 0; j < d; ++j) {
      double outward = 0.0;
      for (int i = 0; i < d; ++i)
        if (i != j) outward += e.intimp(j, i);
      agg.mean_outward_edge(j) += outward;
    }
  }
  const double n = static_cast<double>(expls.size());
  agg.mean_node_importance /= n;
  agg.mean_outward_edge /= n;
  agg.mean_intimp /= n;
  return agg;
}

static std::string percent(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f%%", decimals, v * 100.0);
  return buf;
}

std::string explanation_to_dot(const Explanation& expl, const FeatureSchema& schema,
                               int k, bool exclude_self_loops) {
  if (static_cast<int>(schema.size()) != expl.dim())
    throw std::invalid_argument("explanation_to_dot: schema/explanation dim mismatch");
  const std::vector<EdgeImportance> edges = top_k_edges(expl, k, exclude_self_loops);
  std::ostringstream os;
  os << "digraph explanation {\n";
  os << "  graph [label=\"predicted probability " << percent(expl.predicted_probability, 1)
     << "\"];\n";
  os << "  node [shape=circle, fixedsize=true];\n";
  // only nodes touched by the retained edges
  std::vector<bool> used(expl.dim(), false);
  for (const EdgeImportance& e : edges) used[e.source] = used[e.dest] = true;
  for (int i = 0; i < expl.dim(); ++i) {
    if (!used[i]) continue;
    const double beta = expl.featimp(i);
    char width[32];
    std::snprintf(width, sizeof(width), "%.2f", 0.6 + 4.0 * beta);
    os << "  \"" << schema.features[i].name << "\" [label=\"" << schema.features[i].name
       << "\\n" << percent(beta) << "\", width=" << width << "];\n";
  }
  for (const EdgeImportance& e : edges)
    os << "  \"" << schema.features[e.source].name << "\" -> \""
       << schema.features[e.dest].name << "\" [label=\"" << percent(e.value) << "\"];\n";
  os << "}\n";
  return os.str();
}

void write_explanation_json(const Explanation& expl, const FeatureSchema& schema,
                            const std::string& path) {
  if (static_cast<int>(schema.size()) != expl.dim())
    throw std::invalid_argument("write_explanation_json: dim mismatch");
  json featimp = json::array();
  for (int i = 0; i < expl.dim(); ++i)
    featimp.push_back({{"feature", schema.features[i].name}, {"value", expl.featimp(i)}});
  json intimp = json::array();
  for (int j = 0; j < expl.dim(); ++j) {
    json row = json::array();
    for (int i = 0; i < expl.dim(); ++i) row.push_back(expl.intimp(j, i));
    intimp.push_back(row);
  }
  const json j = {{"predicted_probability", expl.predicted_probability},
                  {"featimp", featimp},
                  {"intimp", intimp}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write explanation: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace gxai
