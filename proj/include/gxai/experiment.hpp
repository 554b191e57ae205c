#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gxai/graph_model.hpp"
#include "gxai/schema.hpp"
#include "gxai/synth.hpp"

namespace gxai {

/// Grid definition for the incremental-stage experiment: dataset source,
/// nested feature sets (model_ids), algorithms, seeds, and settings.
struct ExperimentConfig {
  // dataset source: either a ground-truth spec (synthetic) or a data file
  std::string ground_truth_path;  // synthetic mode
  int synthetic_n = 20000;
  std::string data_path;    // file mode
  std::string schema_path;  // file mode

  std::vector<int> model_ids;
  std::vector<std::string> algorithms;  // gatv2 | dot_product | logistic
  std::vector<std::uint64_t> seeds;

  double test_fraction = 0.2;
  double val_fraction_of_train = 0.125;

  TrainConfig training;      // seed field is overridden per grid seed
  GraphConfig graph;         // variant overridden per algorithm
  double logistic_l2 = 1e-3;
  int logistic_max_iters = 1000;

  int background_size = 100;   // Shapley background rows
  int n_coalitions = 2048;     // sampled Shapley budget
  int shapley_d_max = 12;
  int explain_limit = 200;     // test records per seed used for explanations
  int shapley_record_limit = 100;  // test records per seed used for alignment

  std::string out_dir;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// FNV-1a hash of the canonical config serialization, reported in the
/// provenance block.
std::string experiment_config_hash(const ExperimentConfig& cfg);

/// Machine-readable experiment result. `data` is the full deterministic
/// report (provenance, per-cell metrics, cross-seed aggregates);
/// failed_cells counts grid cells that errored.
struct ExperimentReport {
  nlohmann::json data;
  int failed_cells = 0;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.json and tables.md (metrics grid, importance and
/// interaction tables) into out_dir; both files are byte-deterministic.
/// A run_info.txt with the wall-clock timestamp is written separately.
void emit_report(const ExperimentReport& report, const std::string& out_dir);

/// Loads a graph-model checkpoint, explains one record of the dataset and
/// writes explanation.json plus a DOT file with the top-k edges.
void explain_record(const std::string& checkpoint_path, const std::string& data_path,
                    const std::optional<std::string>& schema_path, int record_index,
                    int k, const std::string& out_dir);

}  // namespace gxai
