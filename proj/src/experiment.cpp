#include "gxai/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <tuple>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gxai/baselines.hpp"
#include "gxai/metrics.hpp"

namespace gxai {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  const bool synthetic = !ground_truth_path.empty();
  const bool from_file = !data_path.empty();
  if (synthetic == from_file)
    throw std::invalid_argument(
        "config: dataset must name exactly one of ground_truth or data+schema");
  if (from_file && schema_path.empty())
    throw std::invalid_argument("config: data file requires a schema file");
  if (synthetic && synthetic_n < 10)
    throw std::invalid_argument("config: synthetic n must be >= 10");
  if (model_ids.empty()) throw std::invalid_argument("config: model_ids is empty");
  for (int m : model_ids)
    if (m < 1 || m > 4) throw std::invalid_argument("config: model_ids must be in 1..4");
  if (algorithms.empty()) throw std::invalid_argument("config: algorithms is empty");
  for (const std::string& a : algorithms)
    if (a != "gatv2" && a != "dot_product" && a != "logistic")
      throw std::invalid_argument("config: unknown algorithm '" + a +
                                  "' (expected gatv2, dot_product or logistic)");
  if (seeds.empty()) throw std::invalid_argument("config: seeds is empty");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("config: test_fraction must be in (0,1)");
  if (!(val_fraction_of_train >= 0.0 && val_fraction_of_train < 1.0))
    throw std::invalid_argument("config: val_fraction_of_train must be in [0,1)");
}

namespace {

const std::set<std::string> kTopLevelKeys = {
    "dataset",    "model_ids", "algorithms", "seeds",   "test_fraction",
    "val_fraction_of_train", "training",  "attribution", "logistic", "out_dir"};

json config_to_json(const ExperimentConfig& c) {
  json dataset;
  if (!c.ground_truth_path.empty())
    dataset = {{"ground_truth", c.ground_truth_path}, {"n", c.synthetic_n}};
  else
    dataset = {{"data", c.data_path}, {"schema", c.schema_path}};
  return json{
      {"dataset", dataset},
      {"model_ids", c.model_ids},
      {"algorithms", c.algorithms},
      {"seeds", c.seeds},
      {"test_fraction", c.test_fraction},
      {"val_fraction_of_train", c.val_fraction_of_train},
      {"training",
       {{"batch_size", c.training.batch_size},
        {"max_epochs", c.training.max_epochs},
        {"patience", c.training.patience},
        {"lr", c.training.lr},
        {"dropout", c.graph.dropout},
        {"head_count", c.graph.head_count}}},
      {"attribution",
       {{"background_size", c.background_size},
        {"n_coalitions", c.n_coalitions},
        {"shapley_d_max", c.shapley_d_max},
        {"explain_limit", c.explain_limit},
        {"shapley_record_limit", c.shapley_record_limit}}},
      {"logistic", {{"l2_lambda", c.logistic_l2}, {"max_iters", c.logistic_max_iters}}},
      {"out_dir", c.out_dir}};
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: invalid JSON in " + path + ": " + e.what());
  }
  for (const auto& [key, _] : j.items())
    if (!kTopLevelKeys.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");

  ExperimentConfig c;
  if (!j.contains("dataset")) throw std::invalid_argument("config: missing 'dataset'");
  const json& ds = j.at("dataset");
  if (ds.contains("ground_truth")) {
    c.ground_truth_path = ds.at("ground_truth").get<std::string>();
    c.synthetic_n = ds.value("n", c.synthetic_n);
  } else if (ds.contains("data")) {
    c.data_path = ds.at("data").get<std::string>();
    if (!ds.contains("schema"))
      throw std::invalid_argument("config: dataset.data requires dataset.schema");
    c.schema_path = ds.at("schema").get<std::string>();
  } else {
    throw std::invalid_argument("config: dataset needs 'ground_truth' or 'data'");
  }
  if (!j.contains("model_ids")) throw std::invalid_argument("config: missing 'model_ids'");
  c.model_ids = j.at("model_ids").get<std::vector<int>>();
  if (!j.contains("algorithms")) throw std::invalid_argument("config: missing 'algorithms'");
  c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  if (!j.contains("seeds")) throw std::invalid_argument("config: missing 'seeds'");
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.val_fraction_of_train = j.value("val_fraction_of_train", c.val_fraction_of_train);
  if (j.contains("training")) {
    const json& t = j.at("training");
    c.training.batch_size = t.value("batch_size", c.training.batch_size);
    c.training.max_epochs = t.value("max_epochs", c.training.max_epochs);
    c.training.patience = t.value("patience", c.training.patience);
    c.training.lr = t.value("lr", c.training.lr);
    c.graph.dropout = t.value("dropout", c.graph.dropout);
    c.graph.head_count = t.value("head_count", c.graph.head_count);
  }
  if (j.contains("attribution")) {
    const json& a = j.at("attribution");
    c.background_size = a.value("background_size", c.background_size);
    c.n_coalitions = a.value("n_coalitions", c.n_coalitions);
    c.shapley_d_max = a.value("shapley_d_max", c.shapley_d_max);
    c.explain_limit = a.value("explain_limit", c.explain_limit);
    c.shapley_record_limit = a.value("shapley_record_limit", c.shapley_record_limit);
  }
  if (j.contains("logistic")) {
    c.logistic_l2 = j.at("logistic").value("l2_lambda", c.logistic_l2);
    c.logistic_max_iters = j.at("logistic").value("max_iters", c.logistic_max_iters);
  }
  c.out_dir = j.value("out_dir", std::string{});
  c.validate();
  return c;
}

std::string experiment_config_hash(const ExperimentConfig& cfg) {
  const std::string canon = config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json metrics_to_json(const MetricsReport& m) {
  return json{{"accuracy", m.accuracy},   {"auroc", m.auroc},
              {"auprc", m.auprc},         {"f1", m.f1},
              {"sensitivity", m.sensitivity}, {"specificity", m.specificity},
              {"threshold", m.threshold}, {"tp", m.tp},
              {"fp", m.fp},               {"tn", m.tn},
              {"fn", m.fn},               {"degenerate", m.degenerate}};
}

ScoredSet scored(const Dataset& ds, const std::vector<double>& scores) {
  ScoredSet s;
  s.scores = scores;
  for (const Record& r : ds.records) s.labels.push_back(r.label);
  return s;
}

struct CellOutput {
  bool ok = false;
  std::string error;
  MetricsReport metrics;
  std::vector<double> importance;               // schema order of staged schema
  std::optional<AggregateExplanation> agg;      // graph algorithms
};

// value-sorted top-k as json, ties broken by name
json top_table(const std::vector<std::string>& names, const std::vector<double>& values,
               std::size_t k) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return names[a] < names[b];
  });
  json out = json::array();
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r)
    out.push_back({{"feature", names[order[r]]}, {"value", values[order[r]]}});
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::optional<GroundTruthModel> gt;
  std::optional<Dataset> file_data;
  if (!cfg.ground_truth_path.empty()) {
    gt = load_ground_truth(cfg.ground_truth_path);
  } else {
    const FeatureSchema schema = load_schema(cfg.schema_path);
    file_data = load_dataset(cfg.data_path, schema);
  }

  struct Key {
    int model_id;
    std::string algorithm;
    bool operator<(const Key& o) const {
      if (model_id != o.model_id) return model_id < o.model_id;
      return algorithm < o.algorithm;
    }
  };
  std::map<Key, std::vector<std::pair<std::uint64_t, CellOutput>>> grid;
  // per (model_id, seed): mean |exact Shapley| of the logistic baseline,
  // reused for every graph algorithm's alignment score
  std::map<std::pair<int, std::uint64_t>, std::vector<double>> logistic_shapley;

  int failed = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset full = gt ? generate_dataset(*gt, cfg.synthetic_n, seed) : *file_data;
    const SplitResult split =
        split_dataset(full, cfg.test_fraction, cfg.val_fraction_of_train, seed);

    for (int model_id : cfg.model_ids) {
      const Dataset tr = select_stage_features(split.train, model_id);
      const Dataset va = select_stage_features(split.val, model_id);
      const Dataset te = select_stage_features(split.test, model_id);
      const int d = static_cast<int>(tr.schema.size());

      for (const std::string& alg : cfg.algorithms) {
        CellOutput cell;
        try {
          if (alg == "logistic") {
            const LogisticModel model =
                train_logistic(tr, cfg.logistic_l2, cfg.logistic_max_iters);
            std::vector<double> val_scores, test_scores;
            for (const Record& r : va.records) val_scores.push_back(model.predict(r.values));
            for (const Record& r : te.records) test_scores.push_back(model.predict(r.values));
            const double thr = optimal_threshold(scored(va, val_scores));
            cell.metrics = evaluate(scored(te, test_scores), thr);

            if (d <= cfg.shapley_d_max) {
              Dataset background;
              background.schema = tr.schema;
              const std::size_t nb =
                  std::min<std::size_t>(cfg.background_size, tr.size());
              background.records.assign(tr.records.begin(), tr.records.begin() + nb);
              const ScoreFn score = [&model](const std::vector<double>& v) {
                return model.predict(v);
              };
              std::vector<double> mean_abs(d, 0.0);
              const std::size_t nrec =
                  std::min<std::size_t>(cfg.shapley_record_limit, te.size());
              for (std::size_t i = 0; i < nrec; ++i) {
                const AttributionResult a =
                    exact_shapley(score, background, te.records[i].values, cfg.shapley_d_max);
                for (int f = 0; f < d; ++f) mean_abs[f] += std::abs(a.values[f]);
              }
              for (int f = 0; f < d; ++f) mean_abs[f] /= static_cast<double>(nrec);
              cell.importance = mean_abs;
              logistic_shapley[{model_id, seed}] = mean_abs;
            } else {
              cell.importance = model.feature_weight_magnitudes();
            }
          } else {
            GraphConfig gcfg = cfg.graph;
            gcfg.variant = attention_variant_from_name(alg);
            TrainConfig tcfg = cfg.training;
            tcfg.seed = seed;
            const GraphModel model = GraphModel::train(tr, va, gcfg, tcfg);
            const std::vector<double> val_scores = model.predict_batch(va);
            const std::vector<double> test_scores = model.predict_batch(te);
            const double thr = optimal_threshold(scored(va, val_scores));
            cell.metrics = evaluate(scored(te, test_scores), thr);

            std::vector<Explanation> expls;
            const std::size_t nexp = std::min<std::size_t>(cfg.explain_limit, te.size());
            for (std::size_t i = 0; i < nexp; ++i)
              expls.push_back(model.explain(te.records[i]));
            cell.agg = aggregate_explanations(expls);
            cell.importance.assign(cell.agg->mean_node_importance.data(),
                                   cell.agg->mean_node_importance.data() + d);
          }
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.error = e.what();
          ++failed;
        }
        grid[{model_id, alg}].push_back({seed, cell});
      }
    }
  }

  // assemble the machine-readable report
  json cells = json::array();
  json aggregates = json::array();
  const std::vector<std::string> metric_names = {"accuracy", "auroc",       "auprc",
                                                 "f1",       "sensitivity", "specificity"};

  for (const auto& [key, runs] : grid) {
    // feature names of the staged schema (stable across seeds)
    std::vector<std::string> names;
    {
      const Dataset probe = gt ? generate_dataset(*gt, 10, cfg.seeds.front()) : *file_data;
      const Dataset staged = select_stage_features(probe, key.model_id);
      for (const FeatureSpec& f : staged.schema.features) names.push_back(f.name);
    }
    const int d = static_cast<int>(names.size());

    std::map<std::string, std::vector<double>> metric_values;
    std::vector<double> mean_importance(d, 0.0);
    Eigen::MatrixXd mean_intimp = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd mean_outward = Eigen::VectorXd::Zero(d);
    std::vector<double> spearman_per_seed;
    int ok_count = 0, graph_ok = 0;

    for (const auto& [seed, cell] : runs) {
      json jc = {{"model_id", key.model_id}, {"algorithm", key.algorithm}, {"seed", seed}};
      if (!cell.ok) {
        jc["status"] = "failed";
        jc["error"] = cell.error;
        cells.push_back(jc);
        continue;
      }
      jc["status"] = "ok";
      jc["metrics"] = metrics_to_json(cell.metrics);
      cells.push_back(jc);

      ++ok_count;
      metric_values["accuracy"].push_back(cell.metrics.accuracy);
      metric_values["auroc"].push_back(cell.metrics.auroc);
      metric_values["auprc"].push_back(cell.metrics.auprc);
      metric_values["f1"].push_back(cell.metrics.f1);
      metric_values["sensitivity"].push_back(cell.metrics.sensitivity);
      metric_values["specificity"].push_back(cell.metrics.specificity);
      for (int f = 0; f < d; ++f) mean_importance[f] += cell.importance[f];
      if (cell.agg) {
        ++graph_ok;
        mean_intimp += cell.agg->mean_intimp;
        mean_outward += cell.agg->mean_outward_edge;
        auto it = logistic_shapley.find({key.model_id, seed});
        if (it != logistic_shapley.end() && d >= 3) {
          std::vector<double> imp(cell.agg->mean_node_importance.data(),
                                  cell.agg->mean_node_importance.data() + d);
          try {
            spearman_per_seed.push_back(spearman(imp, it->second));
          } catch (const std::exception&) {
            // zero rank variance; alignment undefined for this seed
          }
        }
      }
    }

    json agg = {{"model_id", key.model_id}, {"algorithm", key.algorithm},
                {"seeds_ok", ok_count}};
    if (ok_count > 0) {
      json mean = json::object(), sd = json::object();
      for (const std::string& m : metric_names) {
        const std::vector<double>& vals = metric_values[m];
        double mu = 0.0;
        for (double v : vals) mu += v;
        mu /= vals.size();
        double var = 0.0;
        for (double v : vals) var += (v - mu) * (v - mu);
        mean[m] = mu;
        sd[m] = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
      }
      agg["metrics_mean"] = mean;
      agg["metrics_sd"] = sd;
      for (double& v : mean_importance) v /= ok_count;
      agg["importance"] = top_table(names, mean_importance, 10);
      if (graph_ok > 0) {
        mean_intimp /= graph_ok;
        mean_outward /= graph_ok;
        agg["outward_edge"] = top_table(
            names, std::vector<double>(mean_outward.data(), mean_outward.data() + d), 10);
        // directed pairs, self-loops excluded
        std::vector<std::tuple<double, int, int>> directed;
        for (int j = 0; j < d; ++j)
          for (int i = 0; i < d; ++i)
            if (i != j) directed.push_back({mean_intimp(j, i), j, i});
        std::sort(directed.begin(), directed.end(), [](const auto& a, const auto& b) {
          if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
          if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
          return std::get<2>(a) < std::get<2>(b);
        });
        json jdir = json::array();
        for (std::size_t r = 0; r < std::min<std::size_t>(10, directed.size()); ++r)
          jdir.push_back({{"source", names[std::get<1>(directed[r])]},
                          {"dest", names[std::get<2>(directed[r])]},
                          {"value", std::get<0>(directed[r])}});
        agg["interactions_directed"] = jdir;
        // unordered pairs: intimp(j,i) + intimp(i,j)
        std::vector<std::tuple<double, int, int>> unordered;
        for (int a = 0; a < d; ++a)
          for (int b = a + 1; b < d; ++b)
            unordered.push_back({mean_intimp(a, b) + mean_intimp(b, a), a, b});
        std::sort(unordered.begin(), unordered.end(), [](const auto& x, const auto& y) {
          if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
          if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
          return std::get<2>(x) < std::get<2>(y);
        });
        json jun = json::array();
        for (std::size_t r = 0; r < std::min<std::size_t>(10, unordered.size()); ++r)
          jun.push_back({{"a", names[std::get<1>(unordered[r])]},
                         {"b", names[std::get<2>(unordered[r])]},
                         {"value", std::get<0>(unordered[r])}});
        agg["interactions_unordered"] = jun;
      }
      if (!spearman_per_seed.empty()) {
        double mu = 0.0;
        for (double v : spearman_per_seed) mu += v;
        agg["spearman_vs_logistic_shapley"] = {
            {"per_seed", spearman_per_seed},
            {"mean", mu / spearman_per_seed.size()}};
      }
    }
    aggregates.push_back(agg);
  }

  ExperimentReport report;
  report.failed_cells = failed;
  report.data = {{"provenance",
                  {{"config_hash", experiment_config_hash(cfg)}, {"seeds", cfg.seeds}}},
                 {"cells", cells},
                 {"aggregates", aggregates},
                 {"failed_cells", failed}};
  return report;
}

namespace {

std::string fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/report.json");
    out << report.data.dump(2) << "\n";
  }

  std::ostringstream md;
  md << "# Experiment report\n\n";
  md << "Config hash: `" << report.data.at("provenance").at("config_hash").get<std::string>()
     << "`\n\n";
  md << "## Metrics (mean +/- sd across seeds)\n\n";
  md << "| Model | Algorithm | Accuracy | AUROC | AUPRC | F1 | Sensitivity | Specificity |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  for (const json& agg : report.data.at("aggregates")) {
    md << "| " << agg.at("model_id").get<int>() << " | "
       << agg.at("algorithm").get<std::string>() << " |";
    if (agg.contains("metrics_mean")) {
      for (const std::string m :
           {"accuracy", "auroc", "auprc", "f1", "sensitivity", "specificity"})
        md << " " << fixed(agg.at("metrics_mean").at(m).get<double>()) << " +/- "
           << fixed(agg.at("metrics_sd").at(m).get<double>()) << " |";
    } else {
      md << " all seeds failed |||||||";
    }
    md << "\n";
  }

  md << "\n## Top feature importance\n";
  for (const json& agg : report.data.at("aggregates")) {
    if (!agg.contains("importance")) continue;
    md << "\n### Model " << agg.at("model_id").get<int>() << ", "
       << agg.at("algorithm").get<std::string>() << "\n\n";
    md << "| Rank | Feature | Importance |\n|---|---|---|\n";
    int rank = 1;
    for (const json& row : agg.at("importance"))
      md << "| " << rank++ << " | " << row.at("feature").get<std::string>() << " | "
         << fixed(row.at("value").get<double>(), 6) << " |\n";
    if (agg.contains("spearman_vs_logistic_shapley"))
      md << "\nSpearman vs logistic exact Shapley (mean over seeds): "
         << fixed(agg.at("spearman_vs_logistic_shapley").at("mean").get<double>(), 3)
         << "\n";
  }

  md << "\n## Top feature interactions (graph algorithms, self-loops excluded)\n";
  for (const json& agg : report.data.at("aggregates")) {
    if (!agg.contains("interactions_directed")) continue;
    md << "\n### Model " << agg.at("model_id").get<int>() << ", "
       << agg.at("algorithm").get<std::string>() << "\n\n";
    md << "| Rank | Source | Destination | Mean interaction importance |\n|---|---|---|---|\n";
    int rank = 1;
    for (const json& row : agg.at("interactions_directed"))
      md << "| " << rank++ << " | " << row.at("source").get<std::string>() << " | "
         << row.at("dest").get<std::string>() << " | "
         << fixed(row.at("value").get<double>(), 6) << " |\n";
    md << "\nUnordered pairs:\n\n| Rank | Pair | Mean interaction importance |\n|---|---|---|\n";
    rank = 1;
    for (const json& row : agg.at("interactions_unordered"))
      md << "| " << rank++ << " | " << row.at("a").get<std::string>() << " -- "
         << row.at("b").get<std::string>() << " | "
         << fixed(row.at("value").get<double>(), 6) << " |\n";
  }

  {
    std::ofstream out(fs::path(out_dir) / "tables.md");
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/tables.md");
    out << md.str();
  }
  {
    // wall-clock provenance lives outside the deterministic artifacts
    std::ofstream out(fs::path(out_dir) / "run_info.txt");
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    out << "generated_at: " << t << "\n";
  }
}

void explain_record(const std::string& checkpoint_path, const std::string& data_path,
                    const std::optional<std::string>& schema_path, int record_index,
                    int k, const std::string& out_dir) {
  const GraphModel model = GraphModel::load(checkpoint_path);
  if (schema_path) {
    const FeatureSchema external = load_schema(*schema_path);
    if (schema_hash(external) != schema_hash(model.schema()))
      throw std::runtime_error("schema hash mismatch between checkpoint and " + *schema_path);
  }
  const Dataset ds = load_dataset(data_path, model.schema());
  if (record_index < 0 || record_index >= static_cast<int>(ds.size()))
    throw std::invalid_argument("record index out of range");

  const Explanation expl = model.explain(ds.records[record_index]);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);
  write_explanation_json(expl, model.schema(), (fs::path(out_dir) / "explanation.json").string());
  std::ofstream dot(fs::path(out_dir) / "explanation.dot");
  if (!dot) throw std::runtime_error("cannot write explanation.dot in " + out_dir);
  dot << explanation_to_dot(expl, model.schema(), k, true);
}

}  // namespace gxai
