#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gxai {

enum class FeatureKind { Binary, Categorical, Continuous };

std::string feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string& name);

/// One feature: name, kind, and the hospitalization stage at which it
/// becomes available (1=admission, 2=hospital assessment, 3=hospital codes,
/// 4=discharge). Stages drive the incremental Model 1..4 feature sets.
struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Binary;
  int cardinality = 0;  // categorical only, >= 2
  int stage = 1;
};

/// Ordered feature list; the order defines the column and node index of
/// every feature everywhere downstream.
struct FeatureSchema {
  std::vector<FeatureSpec> features;
  std::string label_name = "label";

  std::size_t size() const { return features.size(); }
  int index_of(const std::string& name) const;  // -1 if absent
  void validate() const;
};

struct Record {
  std::vector<double> values;  // aligned to schema order; categoricals stored as integer codes
  int label = 0;
};

/// Per-continuous-feature mean and standard deviation, keyed by feature
/// index. Computed from the training split only; constant columns get sd=1.
struct NormalizationStats {
  std::map<int, std::pair<double, double>> mean_sd;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<Record> records;
  std::optional<NormalizationStats> stats;

  std::size_t size() const { return records.size(); }
  double positive_rate() const;
  void validate() const;  // every record conforms to the schema
};

// Schema file: JSON with keys {label, features:[{name, kind, cardinality?, stage}]}.
FeatureSchema load_schema(const std::string& path);
void save_schema(const FeatureSchema& schema, const std::string& path);

/// FNV-1a hash of the canonical schema serialization; stored in model
/// checkpoints to detect schema mismatches.
std::uint64_t schema_hash(const FeatureSchema& schema);

// Dataset file: comma-separated, header row = feature names + label name
// (any column order), '.' decimal point, no missing values.
Dataset load_dataset(const std::string& path, const FeatureSchema& schema);
void save_dataset(const Dataset& ds, const std::string& path);

NormalizationStats compute_stats(const Dataset& train);

/// z-score a raw continuous value with train-derived stats.
double encode_continuous(double raw, double mean, double sd);

struct SplitResult {
  Dataset train, val, test;
};

/// Stratified-by-label, deterministic split. Normalization stats are
/// computed on the train part and copied to val/test.
SplitResult split_dataset(const Dataset& ds, double test_fraction,
                          double val_fraction_of_train, std::uint64_t seed);

/// Keep only features with stage <= model_id, preserving order.
Dataset select_stage_features(const Dataset& ds, int model_id);

}  // namespace gxai
