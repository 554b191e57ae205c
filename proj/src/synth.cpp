#include "gxai/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "gxai/metrics.hpp"

namespace gxai {

using nlohmann::json;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double FeatureDist::mean() const {
  switch (kind) {
    case FeatureKind::Binary: return p;
    case FeatureKind::Continuous: return 0.5 * (lo + hi);
    default: throw std::logic_error("FeatureDist: unsupported kind");
  }
}

void FeatureDist::validate() const {
  if (kind == FeatureKind::Binary) {
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("FeatureDist: Bernoulli p must be in (0,1)");
  } else if (kind == FeatureKind::Continuous) {
    if (!(lo < hi)) throw std::invalid_argument("FeatureDist: need lo < hi");
  } else {
    throw std::invalid_argument("FeatureDist: only binary and continuous supported");
  }
}

void GroundTruthModel::validate() const {
  const std::size_t d = dim();
  if (feature_dists.size() != d || stage_tags.size() != d)
    throw std::invalid_argument("GroundTruthModel: field lengths disagree");
  if (!feature_names.empty() && feature_names.size() != d)
    throw std::invalid_argument("GroundTruthModel: feature_names length mismatch");
  for (const FeatureDist& fd : feature_dists) fd.validate();
  for (int s : stage_tags)
    if (s < 1 || s > 4) throw std::invalid_argument("GroundTruthModel: stage outside 1..4");
  for (const auto& [pair, w] : interaction_weights) {
    const auto [j, k] = pair;
    if (j < 0 || k < 0 || j >= static_cast<int>(d) || k >= static_cast<int>(d) || j >= k)
      throw std::invalid_argument("GroundTruthModel: bad interaction pair");
    (void)w;
  }
}

double GroundTruthModel::logit(const std::vector<double>& x) const {
  double z = bias;
  for (std::size_t j = 0; j < dim(); ++j) z += linear_weights[j] * x[j];
  for (const auto& [pair, w] : interaction_weights) z += w * x[pair.first] * x[pair.second];
  return z;
}

FeatureSchema GroundTruthModel::make_schema() const {
  FeatureSchema schema;
  schema.label_name = label_name;
  for (std::size_t j = 0; j < dim(); ++j) {
    FeatureSpec f;
    f.name = feature_names.empty() ? "f" + std::to_string(j) : feature_names[j];
    f.kind = feature_dists[j].kind;
    f.stage = stage_tags[j];
    schema.features.push_back(f);
  }
  schema.validate();
  return schema;
}

GroundTruthModel load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ground-truth file: " + path);
  json j;
  in >> j;
  GroundTruthModel gt;
  gt.bias = j.at("bias").get<double>();
  if (j.contains("label")) gt.label_name = j.at("label").get<std::string>();
  for (const json& jf : j.at("features")) {
    FeatureDist fd;
    fd.kind = feature_kind_from_name(jf.at("kind").get<std::string>());
    if (fd.kind == FeatureKind::Binary) fd.p = jf.at("p").get<double>();
    else {
      fd.lo = jf.at("lo").get<double>();
      fd.hi = jf.at("hi").get<double>();
    }
    gt.feature_dists.push_back(fd);
    gt.stage_tags.push_back(jf.at("stage").get<int>());
    gt.linear_weights.push_back(jf.at("weight").get<double>());
    gt.feature_names.push_back(jf.at("name").get<std::string>());
  }
  if (j.contains("interactions"))
    for (const json& ji : j.at("interactions")) {
      int a = ji.at("j").get<int>(), b = ji.at("k").get<int>();
      if (a > b) std::swap(a, b);
      gt.interaction_weights[{a, b}] = ji.at("weight").get<double>();
    }
  gt.validate();
  return gt;
}

void save_ground_truth(const GroundTruthModel& gt, const std::string& path) {
  gt.validate();
  json feats = json::array();
  for (std::size_t j = 0; j < gt.dim(); ++j) {
    const FeatureDist& fd = gt.feature_dists[j];
    json jf = {{"name", gt.feature_names.empty() ? "f" + std::to_string(j) : gt.feature_names[j]},
               {"kind", feature_kind_name(fd.kind)},
               {"stage", gt.stage_tags[j]},
               {"weight", gt.linear_weights[j]}};
    if (fd.kind == FeatureKind::Binary) jf["p"] = fd.p;
    else {
      jf["lo"] = fd.lo;
      jf["hi"] = fd.hi;
    }
    feats.push_back(jf);
  }
  json inter = json::array();
  for (const auto& [pair, w] : gt.interaction_weights)
    inter.push_back({{"j", pair.first}, {"k", pair.second}, {"weight", w}});
  const json j = {{"bias", gt.bias},
                  {"label", gt.label_name},
                  {"features", feats},
                  {"interactions", inter}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ground-truth file: " + path);
  out << j.dump(2) << "\n";
}

// 53-bit uniform in [0,1); kept in-house so generated bytes are stable
// across standard-library implementations.
static double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Dataset generate_dataset(const GroundTruthModel& gt, int n, std::uint64_t seed) {
  gt.validate();
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  Dataset ds;
  ds.schema = gt.make_schema();
  std::mt19937_64 rng(seed);
  ds.records.reserve(n);
  for (int i = 0; i < n; ++i) {
    Record r;
    r.values.resize(gt.dim());
    for (std::size_t j = 0; j < gt.dim(); ++j) {
      const FeatureDist& fd = gt.feature_dists[j];
      if (fd.kind == FeatureKind::Binary)
        r.values[j] = unit_uniform(rng) < fd.p ? 1.0 : 0.0;
      else
        r.values[j] = fd.lo + (fd.hi - fd.lo) * unit_uniform(rng);
    }
    r.label = unit_uniform(rng) < sigmoid(gt.logit(r.values)) ? 1 : 0;
    ds.records.push_back(std::move(r));
  }
  return ds;
}

std::vector<double> oracle_shapley(const GroundTruthModel& gt,
                                   const std::vector<double>& x) {
  gt.validate();
  const int d = static_cast<int>(gt.dim());
  if (d > 16)
    throw std::runtime_error(
        "oracle_shapley: d > 16 exceeds the enumeration bound; use sampled Shapley");
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("oracle_shapley: x has wrong length");

  std::vector<double> mu(d);
  for (int j = 0; j < d; ++j) mu[j] = gt.feature_dists[j].mean();

  // v(S) = E[z | features in S fixed to x], closed form under independence
  const std::size_t nmask = std::size_t{1} << d;
  std::vector<double> v(nmask);
  for (std::size_t m = 0; m < nmask; ++m) {
    double z = gt.bias;
    for (int j = 0; j < d; ++j)
      z += gt.linear_weights[j] * ((m >> j) & 1 ? x[j] : mu[j]);
    for (const auto& [pair, w] : gt.interaction_weights) {
      const double a = (m >> pair.first) & 1 ? x[pair.first] : mu[pair.first];
      const double b = (m >> pair.second) & 1 ? x[pair.second] : mu[pair.second];
      z += w * a * b;
    }
    v[m] = z;
  }

  std::vector<double> fact(d + 1, 1.0);
  for (int k = 1; k <= d; ++k) fact[k] = fact[k - 1] * k;
  std::vector<double> weight(d);  // |S|! (d-1-|S|)! / d!
  for (int s = 0; s < d; ++s) weight[s] = fact[s] * fact[d - 1 - s] / fact[d];

  std::vector<double> phi(d, 0.0);
  for (std::size_t m = 0; m < nmask; ++m) {
    const int s = __builtin_popcountll(m);
    for (int i = 0; i < d; ++i) {
      if ((m >> i) & 1) continue;
      phi[i] += weight[s] * (v[m | (std::size_t{1} << i)] - v[m]);
    }
  }
  return phi;
}

static double mc_auroc(const GroundTruthModel& gt, int n_mc, std::uint64_t seed,
                       int max_stage) {
  gt.validate();
  if (n_mc < 1000) throw std::invalid_argument("bayes_auroc: n_mc must be >= 1000");
  std::mt19937_64 rng(seed);
  ScoredSet s;
  s.scores.reserve(n_mc);
  s.labels.reserve(n_mc);
  std::vector<double> x(gt.dim());
  for (int i = 0; i < n_mc; ++i) {
    for (std::size_t j = 0; j < gt.dim(); ++j) {
      const FeatureDist& fd = gt.feature_dists[j];
      x[j] = fd.kind == FeatureKind::Binary
                 ? (unit_uniform(rng) < fd.p ? 1.0 : 0.0)
                 : fd.lo + (fd.hi - fd.lo) * unit_uniform(rng);
    }
    const int label = unit_uniform(rng) < sigmoid(gt.logit(x)) ? 1 : 0;
    double z = gt.bias;
    for (std::size_t j = 0; j < gt.dim(); ++j)
      if (gt.stage_tags[j] <= max_stage) z += gt.linear_weights[j] * x[j];
    for (const auto& [pair, w] : gt.interaction_weights)
      if (gt.stage_tags[pair.first] <= max_stage &&
          gt.stage_tags[pair.second] <= max_stage)
        z += w * x[pair.first] * x[pair.second];
    s.scores.push_back(sigmoid(z));
    s.labels.push_back(label);
  }
  return auroc(s);
}

double bayes_auroc(const GroundTruthModel& gt, int n_mc, std::uint64_t seed) {
  return mc_auroc(gt, n_mc, seed, 4);
}

double bayes_auroc_staged(const GroundTruthModel& gt, int max_stage, int n_mc,
                          std::uint64_t seed) {
  if (max_stage < 1 || max_stage > 4)
    throw std::invalid_argument("bayes_auroc_staged: max_stage outside 1..4");
  return mc_auroc(gt, n_mc, seed, max_stage);
}

GroundTruth make_ground_truth(const GroundTruthModel& gt, int n_mc,
                              std::uint64_t seed) {
  GroundTruth out;
  out.model = gt;
  for (const auto& [pair, w] : gt.interaction_weights)
    if (w != 0.0) out.planted_interaction_ranking.push_back(pair);
  std::sort(out.planted_interaction_ranking.begin(),
            out.planted_interaction_ranking.end(),
            [&](const auto& a, const auto& b) {
              const double wa = std::abs(gt.interaction_weights.at(a));
              const double wb = std::abs(gt.interaction_weights.at(b));
              if (wa != wb) return wa > wb;
              return a < b;
            });
  out.bayes_auroc = bayes_auroc(gt, n_mc, seed);
  return out;
}

}  // namespace gxai
