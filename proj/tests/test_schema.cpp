#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "gxai/schema.hpp"

using namespace gxai;
namespace fs = std::filesystem;

namespace {

FeatureSchema clinical_schema() {
  FeatureSchema s;
  s.label_name = "isRigidity";
  s.features = {
      {"AGE", FeatureKind::Continuous, 0, 1},
      {"FEMALE", FeatureKind::Binary, 0, 1},
      {"NIHSS", FeatureKind::Continuous, 0, 2},
      {"MT", FeatureKind::Binary, 0, 2},
      {"APRDRG_Severity", FeatureKind::Categorical, 4, 2},
      {"has_diag_R00_R99", FeatureKind::Binary, 0, 3},
      {"DISPUNIFORM", FeatureKind::Categorical, 3, 4},
  };
  return s;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gxai_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("schema validation") {
  FeatureSchema s = clinical_schema();
  CHECK_NOTHROW(s.validate());
  SUBCASE("duplicate name") {
    s.features.push_back({"AGE", FeatureKind::Binary, 0, 1});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("label collision") {
    s.features.push_back({"isRigidity", FeatureKind::Binary, 0, 1});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("categorical cardinality") {
    s.features.push_back({"X", FeatureKind::Categorical, 1, 1});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("bad stage") {
    s.features.push_back({"X", FeatureKind::Binary, 0, 5});
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
}

TEST_CASE("load_dataset") {
  TempDir tmp;
  FeatureSchema s;
  s.label_name = "isRigidity";
  s.features = {{"NIHSS", FeatureKind::Continuous, 0, 2}, {"MT", FeatureKind::Binary, 0, 2}};

  SUBCASE("basic parse") {
    write_file(tmp.path / "d.csv", "NIHSS,MT,isRigidity\n19,1,1\n");
    const Dataset ds = load_dataset((tmp.path / "d.csv").string(), s);
    REQUIRE(ds.size() == 1);
    CHECK(ds.records[0].values[0] == 19.0);
    CHECK(ds.records[0].values[1] == 1.0);
    CHECK(ds.records[0].label == 1);
  }
  SUBCASE("column order independence") {
    write_file(tmp.path / "d.csv", "isRigidity,MT,NIHSS\n0,1,7.5\n");
    const Dataset ds = load_dataset((tmp.path / "d.csv").string(), s);
    CHECK(ds.records[0].values[0] == 7.5);
    CHECK(ds.records[0].label == 0);
  }
  SUBCASE("header only gives zero records") {
    write_file(tmp.path / "d.csv", "NIHSS,MT,isRigidity\n");
    CHECK(load_dataset((tmp.path / "d.csv").string(), s).size() == 0);
  }
  SUBCASE("missing column named in error") {
    write_file(tmp.path / "d.csv", "NIHSS,isRigidity\n1,1\n");
    CHECK_THROWS_WITH_AS(load_dataset((tmp.path / "d.csv").string(), s),
                         doctest::Contains("MT"), std::invalid_argument);
  }
  SUBCASE("extra column rejected") {
    write_file(tmp.path / "d.csv", "NIHSS,MT,EXTRA,isRigidity\n1,1,1,1\n");
    CHECK_THROWS_WITH_AS(load_dataset((tmp.path / "d.csv").string(), s),
                         doctest::Contains("EXTRA"), std::invalid_argument);
  }
  SUBCASE("unparseable cell reports row and column") {
    write_file(tmp.path / "d.csv", "NIHSS,MT,isRigidity\n5,1,1\nxyz,0,0\n");
    CHECK_THROWS_WITH_AS(load_dataset((tmp.path / "d.csv").string(), s),
                         doctest::Contains("row 2"), std::invalid_argument);
  }
  SUBCASE("categorical at cardinality rejected") {
    FeatureSchema sc;
    sc.label_name = "y";
    sc.features = {{"C", FeatureKind::Categorical, 3, 1}};
    write_file(tmp.path / "d.csv", "C,y\n3,0\n");
    CHECK_THROWS_AS(load_dataset((tmp.path / "d.csv").string(), sc), std::invalid_argument);
  }
}

TEST_CASE("dataset round-trip is value identical") {
  TempDir tmp;
  FeatureSchema s = clinical_schema();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  Dataset ds;
  ds.schema = s;
  for (int i = 0; i < 50; ++i) {
    Record r;
    r.values = {u(rng), static_cast<double>(rng() % 2), u(rng) / 3.0,
                static_cast<double>(rng() % 2), static_cast<double>(rng() % 4),
                static_cast<double>(rng() % 2), static_cast<double>(rng() % 3)};
    r.label = static_cast<int>(rng() % 2);
    ds.records.push_back(r);
  }
  save_dataset(ds, (tmp.path / "rt.csv").string());
  const Dataset back = load_dataset((tmp.path / "rt.csv").string(), s);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].label == ds.records[i].label);
    for (std::size_t c = 0; c < s.size(); ++c)
      CHECK(back.records[i].values[c] == ds.records[i].values[c]);
  }
}

TEST_CASE("schema file round-trip") {
  TempDir tmp;
  const FeatureSchema s = clinical_schema();
  save_schema(s, (tmp.path / "s.json").string());
  const FeatureSchema back = load_schema((tmp.path / "s.json").string());
  CHECK(schema_hash(back) == schema_hash(s));
  REQUIRE(back.size() == s.size());
  CHECK(back.features[4].cardinality == 4);
  CHECK(back.features[2].stage == 2);
  CHECK(back.label_name == "isRigidity");
}

namespace {

Dataset make_labeled(int n, double positive_rate, std::uint64_t seed) {
  FeatureSchema s;
  s.label_name = "y";
  s.features = {{"x", FeatureKind::Continuous, 0, 1}};
  Dataset ds;
  ds.schema = s;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < n; ++i) {
    Record r;
    r.values = {u(rng)};
    r.label = u(rng) < positive_rate ? 1 : 0;
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace

TEST_CASE("split sizes 700/100/200") {
  const Dataset ds = make_labeled(1000, 0.4, 3);
  const SplitResult sp = split_dataset(ds, 0.2, 0.125, 7);
  CHECK(sp.train.size() == 700);
  CHECK(sp.val.size() == 100);
  CHECK(sp.test.size() == 200);
}

TEST_CASE("split determinism and partition") {
  const Dataset ds = make_labeled(503, 0.3, 11);
  const SplitResult a = split_dataset(ds, 0.2, 0.125, 7);
  const SplitResult b = split_dataset(ds, 0.2, 0.125, 7);
  CHECK(a.train.size() + a.val.size() + a.test.size() == ds.size());
  auto same = [](const Dataset& x, const Dataset& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x.records[i].values != y.records[i].values ||
          x.records[i].label != y.records[i].label)
        return false;
    return true;
  };
  CHECK(same(a.train, b.train));
  CHECK(same(a.val, b.val));
  CHECK(same(a.test, b.test));
  // different seed changes membership
  const SplitResult c = split_dataset(ds, 0.2, 0.125, 8);
  CHECK_FALSE(same(a.train, c.train));
}

TEST_CASE("split stratification keeps positive rates close") {
  // target the positive rate reported for the clinical cohort
  const Dataset ds = make_labeled(4000, 0.4345, 21);
  const double full = ds.positive_rate();
  const SplitResult sp = split_dataset(ds, 0.2, 0.125, 13);
  for (const Dataset* part : {&sp.train, &sp.val, &sp.test}) {
    CHECK(part->positive_rate() > full - 0.02);
    CHECK(part->positive_rate() < full + 0.02);
  }
}

TEST_CASE("split argument errors") {
  const Dataset ds = make_labeled(100, 0.5, 1);
  CHECK_THROWS_AS(split_dataset(ds, 0.0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(ds, 1.0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(ds, 0.2, 1.0, 1), std::invalid_argument);
  const Dataset tiny = make_labeled(2, 0.5, 1);
  CHECK_THROWS_AS(split_dataset(tiny, 0.2, 0.1, 1), std::invalid_argument);
}

TEST_CASE("normalization stats from train only, raw values untouched") {
  Dataset ds = make_labeled(200, 0.5, 2);
  const std::vector<double> before = [&] {
    std::vector<double> v;
    for (const Record& r : ds.records) v.push_back(r.values[0]);
    return v;
  }();
  const SplitResult sp = split_dataset(ds, 0.2, 0.125, 5);
  REQUIRE(sp.train.stats.has_value());
  REQUIRE(sp.test.stats.has_value());
  // stats on val/test equal train stats
  CHECK(sp.val.stats->mean_sd.at(0) == sp.train.stats->mean_sd.at(0));
  CHECK(sp.test.stats->mean_sd.at(0) == sp.train.stats->mean_sd.at(0));
  // train stats come from train records alone
  double mean = 0;
  for (const Record& r : sp.train.records) mean += r.values[0];
  mean /= sp.train.size();
  CHECK(sp.train.stats->mean_sd.at(0).first == doctest::Approx(mean));
  // no raw value was mutated anywhere
  std::vector<double> after;
  for (const Record& r : ds.records) after.push_back(r.values[0]);
  CHECK(after == before);
}

TEST_CASE("constant column gets sd 1") {
  FeatureSchema s;
  s.label_name = "y";
  s.features = {{"c", FeatureKind::Continuous, 0, 1}};
  Dataset ds;
  ds.schema = s;
  for (int i = 0; i < 10; ++i) ds.records.push_back({{3.5}, i % 2});
  const NormalizationStats st = compute_stats(ds);
  CHECK(st.mean_sd.at(0).second == 1.0);
  CHECK(encode_continuous(3.5, st.mean_sd.at(0).first, st.mean_sd.at(0).second) == 0.0);
}

TEST_CASE("select_stage_features") {
  const FeatureSchema s = clinical_schema();
  Dataset ds;
  ds.schema = s;
  ds.records.push_back({{70.0, 1, 19.0, 1, 2, 1, 0}, 1});

  SUBCASE("stage filtering") {
    const Dataset m1 = select_stage_features(ds, 1);
    CHECK(m1.schema.size() == 2);
    CHECK(m1.schema.features[0].name == "AGE");
    CHECK(m1.schema.features[1].name == "FEMALE");
    CHECK(m1.records[0].values == std::vector<double>{70.0, 1});
    CHECK(m1.records[0].label == 1);

    const Dataset m2 = select_stage_features(ds, 2);
    CHECK(m2.schema.size() == 5);
    CHECK(m2.schema.features[4].name == "APRDRG_Severity");
  }
  SUBCASE("model 4 is identity on schema") {
    const Dataset m4 = select_stage_features(ds, 4);
    CHECK(m4.schema.size() == s.size());
    CHECK(m4.records[0].values == ds.records[0].values);
  }
  SUBCASE("nesting property") {
    for (int a = 1; a < 4; ++a) {
      const Dataset da = select_stage_features(ds, a);
      const Dataset db = select_stage_features(ds, a + 1);
      for (const FeatureSpec& f : da.schema.features)
        CHECK(db.schema.index_of(f.name) >= 0);
    }
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(select_stage_features(ds, 0), std::invalid_argument);
    CHECK_THROWS_AS(select_stage_features(ds, 5), std::invalid_argument);
  }
  SUBCASE("stats reindexed to new columns") {
    ds.stats = compute_stats(ds);
    const Dataset m2 = select_stage_features(ds, 2);
    REQUIRE(m2.stats.has_value());
    CHECK(m2.stats->mean_sd.count(0) == 1);  // AGE
    CHECK(m2.stats->mean_sd.count(2) == 1);  // NIHSS moved to index 2
    CHECK(m2.stats->mean_sd.size() == 2);
  }
}
