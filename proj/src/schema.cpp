#include "gxai/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gxai {

using nlohmann::json;

std::string feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Binary: return "binary";
    case FeatureKind::Categorical: return "categorical";
    case FeatureKind::Continuous: return "continuous";
  }
  throw std::logic_error("unknown FeatureKind");
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "binary") return FeatureKind::Binary;
  if (name == "categorical") return FeatureKind::Categorical;
  if (name == "continuous") return FeatureKind::Continuous;
  throw std::invalid_argument("unknown feature kind: " + name);
}

int FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return static_cast<int>(i);
  return -1;
}

void FeatureSchema::validate() const {
  std::vector<std::string> names;
  for (const FeatureSpec& f : features) {
    if (f.name.empty()) throw std::invalid_argument("schema: empty feature name");
    if (f.name == label_name)
      throw std::invalid_argument("schema: feature '" + f.name + "' collides with label name");
    names.push_back(f.name);
    if (f.kind == FeatureKind::Categorical && f.cardinality < 2)
      throw std::invalid_argument("schema: categorical '" + f.name + "' needs cardinality >= 2");
    if (f.stage < 1 || f.stage > 4)
      throw std::invalid_argument("schema: '" + f.name + "' has stage outside 1..4");
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw std::invalid_argument("schema: duplicate feature name");
}

double Dataset::positive_rate() const {
  if (records.empty()) return 0.0;
  long pos = 0;
  for (const Record& r : records) pos += r.label;
  return static_cast<double>(pos) / static_cast<double>(records.size());
}

static void validate_value(const FeatureSpec& f, double v, const std::string& where) {
  if (!std::isfinite(v))
    throw std::invalid_argument(where + ": non-finite value for '" + f.name + "'");
  switch (f.kind) {
    case FeatureKind::Binary:
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument(where + ": binary '" + f.name + "' must be 0 or 1");
      break;
    case FeatureKind::Categorical: {
      double ip;
      if (std::modf(v, &ip) != 0.0 || v < 0.0 || v >= f.cardinality)
        throw std::invalid_argument(where + ": categorical '" + f.name +
                                    "' outside [0," + std::to_string(f.cardinality) + ")");
      break;
    }
    case FeatureKind::Continuous:
      break;
  }
}

void Dataset::validate() const {
  schema.validate();
  for (std::size_t r = 0; r < records.size(); ++r) {
    const Record& rec = records[r];
    if (rec.values.size() != schema.size())
      throw std::invalid_argument("dataset: record " + std::to_string(r) + " has wrong width");
    if (rec.label != 0 && rec.label != 1)
      throw std::invalid_argument("dataset: record " + std::to_string(r) + " label not in {0,1}");
    for (std::size_t c = 0; c < schema.size(); ++c)
      validate_value(schema.features[c], rec.values[c], "record " + std::to_string(r));
  }
  if (stats) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const bool cont = schema.features[c].kind == FeatureKind::Continuous;
      const bool has = stats->mean_sd.count(static_cast<int>(c)) > 0;
      if (cont != has)
        throw std::invalid_argument("dataset: stats do not cover exactly the continuous features");
    }
  }
}

static json schema_to_json(const FeatureSchema& schema) {
  json feats = json::array();
  for (const FeatureSpec& f : schema.features) {
    json jf = {{"name", f.name}, {"kind", feature_kind_name(f.kind)}, {"stage", f.stage}};
    if (f.kind == FeatureKind::Categorical) jf["cardinality"] = f.cardinality;
    feats.push_back(jf);
  }
  return json{{"label", schema.label_name}, {"features", feats}};
}

static FeatureSchema schema_from_json(const json& j) {
  FeatureSchema schema;
  schema.label_name = j.at("label").get<std::string>();
  for (const json& jf : j.at("features")) {
    FeatureSpec f;
    f.name = jf.at("name").get<std::string>();
    f.kind = feature_kind_from_name(jf.at("kind").get<std::string>());
    f.stage = jf.at("stage").get<int>();
    if (f.kind == FeatureKind::Categorical) f.cardinality = jf.at("cardinality").get<int>();
    schema.features.push_back(f);
  }
  schema.validate();
  return schema;
}

FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  json j;
  in >> j;
  return schema_from_json(j);
}

void save_schema(const FeatureSchema& schema, const std::string& path) {
  schema.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write schema file: " + path);
  out << schema_to_json(schema).dump(2) << "\n";
}

std::uint64_t schema_hash(const FeatureSchema& schema) {
  const std::string canon = schema_to_json(schema).dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

Dataset load_dataset(const std::string& path, const FeatureSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset file empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  // map each schema column (plus label) to its file column
  const std::size_t d = schema.size();
  std::vector<int> col_of(d + 1, -1);  // last slot = label
  for (std::size_t h = 0; h < header.size(); ++h) {
    const std::string& name = header[h];
    if (name == schema.label_name) {
      if (col_of[d] != -1) throw std::invalid_argument("duplicate column: " + name);
      col_of[d] = static_cast<int>(h);
      continue;
    }
    const int idx = schema.index_of(name);
    if (idx < 0) throw std::invalid_argument("unexpected column in dataset file: " + name);
    if (col_of[idx] != -1) throw std::invalid_argument("duplicate column: " + name);
    col_of[idx] = static_cast<int>(h);
  }
  for (std::size_t c = 0; c < d; ++c)
    if (col_of[c] < 0)
      throw std::invalid_argument("missing column: " + schema.features[c].name);
  if (col_of[d] < 0) throw std::invalid_argument("missing column: " + schema.label_name);

  Dataset ds;
  ds.schema = schema;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("row " + std::to_string(row) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    auto parse = [&](int file_col, const std::string& col_name) {
      const std::string& cell = cells[file_col];
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing junk");
        return v;
      } catch (const std::exception&) {
        throw std::invalid_argument("row " + std::to_string(row) + ", column '" + col_name +
                                    "': cannot parse '" + cell + "'");
      }
    };
    Record rec;
    rec.values.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
      rec.values[c] = parse(col_of[c], schema.features[c].name);
      validate_value(schema.features[c], rec.values[c], "row " + std::to_string(row));
    }
    const double lbl = parse(col_of[d], schema.label_name);
    if (lbl != 0.0 && lbl != 1.0)
      throw std::invalid_argument("row " + std::to_string(row) + ": label must be 0 or 1");
    rec.label = static_cast<int>(lbl);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

static std::string format_value(double v) {
  // shortest representation that round-trips exactly
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    if (std::stod(os.str()) == v) return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (std::size_t c = 0; c < ds.schema.size(); ++c)
    out << ds.schema.features[c].name << ",";
  out << ds.schema.label_name << "\n";
  for (const Record& r : ds.records) {
    for (double v : r.values) out << format_value(v) << ",";
    out << r.label << "\n";
  }
}

NormalizationStats compute_stats(const Dataset& train) {
  NormalizationStats st;
  for (std::size_t c = 0; c < train.schema.size(); ++c) {
    if (train.schema.features[c].kind != FeatureKind::Continuous) continue;
    double mean = 0.0;
    for (const Record& r : train.records) mean += r.values[c];
    const double n = std::max<double>(1.0, static_cast<double>(train.size()));
    mean /= n;
    double var = 0.0;
    for (const Record& r : train.records) {
      const double dlt = r.values[c] - mean;
      var += dlt * dlt;
    }
    var /= n;
    double sd = std::sqrt(var);
    if (sd == 0.0) sd = 1.0;  // constant column
    st.mean_sd[static_cast<int>(c)] = {mean, sd};
  }
  return st;
}

double encode_continuous(double raw, double mean, double sd) {
  return (raw - mean) / sd;
}

// Largest-remainder allocation of `total` slots across class buckets
// proportional to their sizes; keeps each split's class mix within one
// record of exact stratification.
static std::vector<long> allocate(const std::vector<long>& sizes, long total) {
  const long n = std::accumulate(sizes.begin(), sizes.end(), 0L);
  std::vector<long> alloc(sizes.size());
  std::vector<std::pair<double, std::size_t>> rema;
  long assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double exact = static_cast<double>(sizes[i]) * total / static_cast<double>(n);
    alloc[i] = static_cast<long>(std::floor(exact));
    assigned += alloc[i];
    rema.push_back({exact - std::floor(exact), i});
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (long k = 0; k < total - assigned; ++k) alloc[rema[k].second] += 1;
  return alloc;
}

SplitResult split_dataset(const Dataset& ds, double test_fraction,
                          double val_fraction_of_train, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("split_dataset: test_fraction must be in (0,1)");
  if (!(val_fraction_of_train >= 0.0 && val_fraction_of_train < 1.0))
    throw std::invalid_argument("split_dataset: val_fraction_of_train must be in [0,1)");
  if (ds.size() < 3) throw std::invalid_argument("split_dataset: need at least 3 records");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.size(); ++i)
    (ds.records[i].label == 1 ? pos : neg).push_back(i);

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  const long n = static_cast<long>(ds.size());
  const long n_test = std::llround(test_fraction * n);
  const long n_val = std::llround(val_fraction_of_train * (n - n_test));
  const long n_train = n - n_test - n_val;
  if (n_test == 0 || n_train <= 0)
    throw std::invalid_argument("split_dataset: a split would be empty");
  if (val_fraction_of_train > 0.0 && n_val == 0)
    throw std::invalid_argument("split_dataset: validation split would be empty");

  const std::vector<long> sizes = {static_cast<long>(pos.size()),
                                   static_cast<long>(neg.size())};
  const std::vector<long> test_alloc = allocate(sizes, n_test);
  const std::vector<long> pool_sizes = {sizes[0] - test_alloc[0], sizes[1] - test_alloc[1]};
  const std::vector<long> val_alloc = allocate(pool_sizes, n_val);

  std::vector<std::size_t> test_idx, val_idx, train_idx;
  auto carve = [&](const std::vector<std::size_t>& cls, long ntest, long nval) {
    test_idx.insert(test_idx.end(), cls.begin(), cls.begin() + ntest);
    val_idx.insert(val_idx.end(), cls.begin() + ntest, cls.begin() + ntest + nval);
    train_idx.insert(train_idx.end(), cls.begin() + ntest + nval, cls.end());
  };
  carve(pos, test_alloc[0], val_alloc[0]);
  carve(neg, test_alloc[1], val_alloc[1]);

  // preserve original row order inside each split
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  auto take = [&](const std::vector<std::size_t>& idx) {
    Dataset out;
    out.schema = ds.schema;
    for (std::size_t i : idx) out.records.push_back(ds.records[i]);
    return out;
  };
  SplitResult res{take(train_idx), take(val_idx), take(test_idx)};
  const NormalizationStats st = compute_stats(res.train);
  res.train.stats = st;
  res.val.stats = st;
  res.test.stats = st;
  return res;
}

Dataset select_stage_features(const Dataset& ds, int model_id) {
  if (model_id < 1 || model_id > 4)
    throw std::invalid_argument("select_stage_features: model_id must be in 1..4");
  std::vector<int> keep;
  Dataset out;
  out.schema.label_name = ds.schema.label_name;
  for (std::size_t c = 0; c < ds.schema.size(); ++c) {
    if (ds.schema.features[c].stage <= model_id) {
      keep.push_back(static_cast<int>(c));
      out.schema.features.push_back(ds.schema.features[c]);
    }
  }
  for (const Record& r : ds.records) {
    Record nr;
    nr.label = r.label;
    for (int c : keep) nr.values.push_back(r.values[c]);
    out.records.push_back(std::move(nr));
  }
  if (ds.stats) {
    NormalizationStats st;
    for (std::size_t nc = 0; nc < keep.size(); ++nc) {
      auto it = ds.stats->mean_sd.find(keep[nc]);
      if (it != ds.stats->mean_sd.end()) st.mean_sd[static_cast<int>(nc)] = it->second;
    }
    out.stats = st;
  }
  return out;
}

}  // namespace gxai
