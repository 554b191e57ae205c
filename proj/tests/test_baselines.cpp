#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gxai/baselines.hpp"
#include "gxai/metrics.hpp"

using namespace gxai;

namespace {

FeatureSchema binary_schema(int d) {
  FeatureSchema s;
  for (int i = 0; i < d; ++i)
    s.features.push_back({"f" + std::to_string(i), FeatureKind::Binary, 0, 1});
  return s;
}

// label copies feature 0; remaining features are independent noise
Dataset separable_dataset(int d, int n, std::uint64_t seed) {
  Dataset ds;
  ds.schema = binary_schema(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < n; ++i) {
    Record r;
    for (int j = 0; j < d; ++j) r.values.push_back(u(rng) < 0.5 ? 1.0 : 0.0);
    r.label = r.values[0] == 1.0 ? 1 : 0;
    ds.records.push_back(r);
  }
  return ds;
}

Dataset random_background(int d, int n, std::uint64_t seed) {
  Dataset ds;
  ds.schema = binary_schema(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < n; ++i) {
    Record r;
    for (int j = 0; j < d; ++j) r.values.push_back(u(rng));
    ds.records.push_back(r);
  }
  return ds;
}

double dataset_auroc(const LogisticModel& m, const Dataset& ds) {
  ScoredSet s;
  for (const Record& r : ds.records) {
    s.scores.push_back(m.predict_record(r));
    s.labels.push_back(r.label);
  }
  return auroc(s);
}

}  // namespace

TEST_CASE("logistic regression on separable data") {
  const Dataset ds = separable_dataset(4, 300, 1);
  const LogisticModel m = train_logistic(ds, 1e-3, 500);
  CHECK(dataset_auroc(m, ds) >= 0.99);
  CHECK(m.weights(0) > 1.0);
  // noise weights stay small relative to the signal
  for (int j = 1; j < 4; ++j) CHECK(std::abs(m.weights(j)) < 0.5 * m.weights(0));
}

TEST_CASE("logistic heavy ridge shrinks weights toward zero") {
  const Dataset ds = separable_dataset(3, 200, 2);
  const LogisticModel m = train_logistic(ds, 1e6, 500);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(m.weights(j)) < 1e-3);
}

TEST_CASE("logistic training is invariant to record duplication") {
  const Dataset ds = separable_dataset(3, 150, 3);
  Dataset doubled = ds;
  doubled.records.insert(doubled.records.end(), ds.records.begin(), ds.records.end());
  const LogisticModel a = train_logistic(ds, 1e-2, 300);
  const LogisticModel b = train_logistic(doubled, 1e-2, 300);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(a.bias - b.bias) < 1e-8);
}

TEST_CASE("logistic one-hot expansion and weight magnitudes") {
  FeatureSchema s;
  s.features.push_back({"b", FeatureKind::Binary, 0, 1});
  s.features.push_back({"c", FeatureKind::Categorical, 3, 1});
  s.features.push_back({"x", FeatureKind::Continuous, 0, 2});
  Dataset ds;
  ds.schema = s;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 120; ++i) {
    Record r;
    r.values = {u(rng) < 0.5 ? 1.0 : 0.0, std::floor(u(rng) * 3), 10.0 * u(rng)};
    r.label = r.values[0] == 1.0 ? 1 : 0;
    ds.records.push_back(r);
  }
  const LogisticModel m = train_logistic(ds, 1e-2, 200);
  REQUIRE(m.weights.size() == 1 + 3 + 1);
  const Eigen::VectorXd phi = m.expand({1.0, 2.0, 5.0});
  CHECK(phi(0) == 1.0);
  CHECK(phi(1) == 0.0);
  CHECK(phi(2) == 0.0);
  CHECK(phi(3) == 1.0);
  const std::vector<double> mags = m.feature_weight_magnitudes();
  REQUIRE(mags.size() == 3);
  CHECK(mags[1] == doctest::Approx(std::abs(m.weights(1)) + std::abs(m.weights(2)) +
                                   std::abs(m.weights(3))));
  CHECK_THROWS_AS(m.expand({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("logistic input validation") {
  Dataset empty;
  empty.schema = binary_schema(2);
  CHECK_THROWS_AS(train_logistic(empty), std::invalid_argument);
  Dataset single = separable_dataset(2, 50, 5);
  for (Record& r : single.records) r.label = 1;
  CHECK_THROWS_AS(train_logistic(single), std::invalid_argument);
}

TEST_CASE("exact shapley on a linear score matches the closed form") {
  const int d = 5;
  const Dataset bg = random_background(d, 7, 6);
  const std::vector<double> w = {2.0, -1.0, 0.5, 0.0, 3.0};
  ScoreFn score = [&](const std::vector<double>& v) {
    double z = 0.0;
    for (int j = 0; j < d; ++j) z += w[j] * v[j];
    return z;
  };
  std::vector<double> mean(d, 0.0);
  for (const Record& r : bg.records)
    for (int j = 0; j < d; ++j) mean[j] += r.values[j] / bg.size();
  const std::vector<double> x = {1.0, 0.3, 0.9, 0.2, 0.7};
  const AttributionResult res = exact_shapley(score, bg, x);
  for (int j = 0; j < d; ++j)
    CHECK(res.values[j] == doctest::Approx(w[j] * (x[j] - mean[j])).epsilon(1e-9));
  CHECK(res.values[3] == doctest::Approx(0.0));  // null player
}

TEST_CASE("exact shapley efficiency on a nonlinear score") {
  const int d = 6;
  const Dataset bg = random_background(d, 9, 7);
  ScoreFn score = [](const std::vector<double>& v) {
    double prod = 1.0, sum = 0.0;
    for (double x : v) {
      prod *= (0.5 + x);
      sum += x;
    }
    return prod + std::sin(sum);
  };
  const std::vector<double> x = {0.9, 0.1, 0.5, 0.8, 0.0, 0.3};
  const AttributionResult res = exact_shapley(score, bg, x);
  double mean_bg = 0.0;
  for (const Record& r : bg.records) mean_bg += score(r.values) / bg.size();
  double sum_phi = 0.0;
  for (double v : res.values) sum_phi += v;
  CHECK(std::abs(sum_phi - (score(x) - mean_bg)) < 1e-9);
}

TEST_CASE("exact shapley guards") {
  const Dataset bg = random_background(13, 3, 8);
  ScoreFn score = [](const std::vector<double>& v) { return v[0]; };
  CHECK_THROWS_AS(exact_shapley(score, bg, std::vector<double>(13, 0.0)),
                  std::runtime_error);
  Dataset empty;
  empty.schema = binary_schema(2);
  CHECK_THROWS_AS(exact_shapley(score, empty, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("exact shapley through a trained logistic model") {
  const Dataset ds = separable_dataset(4, 200, 9);
  const LogisticModel m = train_logistic(ds, 1e-2, 300);
  Dataset bg = ds;
  bg.records.resize(20);
  ScoreFn score = [&](const std::vector<double>& v) { return m.predict(v); };
  const std::vector<double> x = ds.records[0].values;
  const AttributionResult res = exact_shapley(score, bg, x);
  // the label-defining feature dominates the attribution
  for (int j = 1; j < 4; ++j) CHECK(std::abs(res.values[0]) > std::abs(res.values[j]));
  double mean_bg = 0.0;
  for (const Record& r : bg.records) mean_bg += score(r.values) / bg.size();
  double sum_phi = 0.0;
  for (double v : res.values) sum_phi += v;
  CHECK(std::abs(sum_phi - (score(x) - mean_bg)) < 1e-9);
}

TEST_CASE("sampled shapley") {
  ScoreFn score = [](const std::vector<double>& v) {
    double z = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) z += (j + 1.0) * v[j];
    z += 2.0 * v[0] * v[1];
    return z;
  };
  SUBCASE("exhaustive coalition budget reproduces the exact values") {
    const int d = 6;
    const Dataset bg = random_background(d, 5, 10);
    const std::vector<double> x = {1.0, 0.8, 0.1, 0.6, 0.4, 0.9};
    const AttributionResult exact = exact_shapley(score, bg, x);
    const AttributionResult est = sampled_shapley(score, bg, x, 64, 1);
    for (int j = 0; j < d; ++j)
      CHECK(std::abs(est.values[j] - exact.values[j]) < 1e-6);
  }
  SUBCASE("sampling approximates the exact values") {
    const int d = 10;
    const Dataset bg = random_background(d, 5, 11);
    std::vector<double> x(d);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (double& v : x) v = u(rng);
    const AttributionResult exact = exact_shapley(score, bg, x);
    const AttributionResult est = sampled_shapley(score, bg, x, 500, 2);
    for (int j = 0; j < d; ++j)
      CHECK(std::abs(est.values[j] - exact.values[j]) < 0.05);
    // efficiency holds exactly by construction
    double v_full = score(x), v_empty = 0.0;
    for (const Record& r : bg.records) v_empty += score(r.values) / bg.size();
    double sum_phi = 0.0;
    for (double v : est.values) sum_phi += v;
    CHECK(std::abs(sum_phi - (v_full - v_empty)) < 1e-9);
  }
  SUBCASE("determinism in the seed") {
    const int d = 8;
    const Dataset bg = random_background(d, 4, 13);
    std::vector<double> x(d, 0.5);
    const AttributionResult a = sampled_shapley(score, bg, x, 100, 7);
    const AttributionResult b = sampled_shapley(score, bg, x, 100, 7);
    CHECK(a.values == b.values);
  }
  SUBCASE("budget guard") {
    const Dataset bg = random_background(4, 3, 14);
    CHECK_THROWS_AS(sampled_shapley(score, bg, {0, 0, 0, 0}, 9, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("permutation importance") {
  // feature 0 carries the label, feature 1 is constant, feature 2 is noise
  Dataset ds;
  ds.schema = binary_schema(3);
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 400; ++i) {
    Record r;
    r.values = {u(rng) < 0.5 ? 1.0 : 0.0, 1.0, u(rng) < 0.5 ? 1.0 : 0.0};
    r.label = r.values[0] == 1.0 ? 1 : 0;
    ds.records.push_back(r);
  }
  ScoreFn score = [](const std::vector<double>& v) {
    return 0.8 * v[0] + 0.1 * v[1] + 0.01 * v[2];
  };
  SUBCASE("auroc drops") {
    const AttributionResult res =
        permutation_importance(score, ds, PermutationMetric::Auroc, 3, 100);
    CHECK(res.values[0] > 0.4);
    CHECK(res.values[1] == 0.0);  // shuffling a constant changes nothing
    CHECK(std::abs(res.values[2]) < 0.05);
    CHECK(res.values[0] > 10.0 * std::abs(res.values[2]));
  }
  SUBCASE("f1 metric path") {
    const AttributionResult res =
        permutation_importance(score, ds, PermutationMetric::F1, 2, 100);
    CHECK(res.values[0] > 0.3);
    CHECK(res.values[1] == 0.0);
  }
  SUBCASE("determinism and guards") {
    const AttributionResult a =
        permutation_importance(score, ds, PermutationMetric::Auroc, 2, 5);
    const AttributionResult b =
        permutation_importance(score, ds, PermutationMetric::Auroc, 2, 5);
    CHECK(a.values == b.values);
    CHECK_THROWS_AS(permutation_importance(score, ds, PermutationMetric::Auroc, 0, 5),
                    std::invalid_argument);
    Dataset single = ds;
    for (Record& r : single.records) r.label = 0;
    CHECK_THROWS_AS(
        permutation_importance(score, single, PermutationMetric::Auroc, 1, 5),
        std::invalid_argument);
  }
}
