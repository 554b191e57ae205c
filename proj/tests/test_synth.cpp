#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gxai/synth.hpp"

using namespace gxai;

namespace {

GroundTruthModel zero_model(int d) {
  GroundTruthModel gt;
  gt.linear_weights.assign(d, 0.0);
  gt.feature_dists.assign(d, FeatureDist{});
  gt.stage_tags.assign(d, 1);
  return gt;
}

// brute-force Shapley by sampling feature permutations with Monte-Carlo
// expectations; independent of the closed-form enumeration path
std::vector<double> shapley_mc_oracle(const GroundTruthModel& gt,
                                      const std::vector<double>& x, int n_mc,
                                      std::uint64_t seed) {
  const int d = static_cast<int>(gt.dim());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  auto sample = [&](int j) {
    const FeatureDist& fd = gt.feature_dists[j];
    return fd.kind == FeatureKind::Binary ? (u(rng) < fd.p ? 1.0 : 0.0)
                                          : fd.lo + (fd.hi - fd.lo) * u(rng);
  };
  std::vector<double> phi(d, 0.0);
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> z(d);
  for (int t = 0; t < n_mc; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int j = 0; j < d; ++j) z[j] = sample(j);
    double prev = gt.logit(z);
    for (int j : perm) {
      z[j] = x[j];
      const double cur = gt.logit(z);
      phi[j] += cur - prev;
      prev = cur;
    }
  }
  for (double& v : phi) v /= n_mc;
  return phi;
}

}  // namespace

TEST_CASE("generate_dataset positive rates") {
  SUBCASE("symmetric coin") {
    const Dataset ds = generate_dataset(zero_model(3), 10000, 1);
    CHECK(ds.positive_rate() > 0.49);
    CHECK(ds.positive_rate() < 0.51);
  }
  SUBCASE("bias reproduces clinical positive rate") {
    GroundTruthModel gt = zero_model(3);
    gt.bias = -0.2636;  // sigmoid(-0.2636) = 0.4345
    CHECK(sigmoid(gt.bias) == doctest::Approx(0.4345).epsilon(1e-3));
    const Dataset ds = generate_dataset(gt, 50000, 2);
    CHECK(std::abs(ds.positive_rate() - 0.4345) < 0.01);
  }
}

TEST_CASE("generate_dataset determinism") {
  GroundTruthModel gt = zero_model(4);
  gt.linear_weights = {1.0, -0.5, 0.25, 0.0};
  gt.feature_dists[2] = {FeatureKind::Continuous, 0.5, -1.0, 1.0};
  const Dataset a = generate_dataset(gt, 500, 42);
  const Dataset b = generate_dataset(gt, 500, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].values == b.records[i].values);
    CHECK(a.records[i].label == b.records[i].label);
  }
  const Dataset c = generate_dataset(gt, 500, 43);
  bool differ = false;
  for (std::size_t i = 0; i < a.size() && !differ; ++i)
    differ = a.records[i].values != c.records[i].values;
  CHECK(differ);
}

TEST_CASE("schema carries stage tags and kinds") {
  GroundTruthModel gt = zero_model(3);
  gt.stage_tags = {1, 2, 4};
  gt.feature_dists[1] = {FeatureKind::Continuous, 0.5, 0.0, 10.0};
  const Dataset ds = generate_dataset(gt, 5, 0);
  CHECK(ds.schema.features[0].stage == 1);
  CHECK(ds.schema.features[2].stage == 4);
  CHECK(ds.schema.features[1].kind == FeatureKind::Continuous);
}

TEST_CASE("oracle shapley closed forms") {
  SUBCASE("pure linear model") {
    GroundTruthModel gt = zero_model(2);
    gt.linear_weights = {2.0, 3.0};
    const std::vector<double> phi = oracle_shapley(gt, {1.0, 1.0});
    CHECK(phi[0] == doctest::Approx(1.0).epsilon(1e-12));   // 2 * (1 - 0.5)
    CHECK(phi[1] == doctest::Approx(1.5).epsilon(1e-12));   // 3 * (1 - 0.5)
  }
  SUBCASE("null player") {
    GroundTruthModel gt = zero_model(3);
    gt.linear_weights = {1.0, 0.0, 2.0};
    gt.interaction_weights[{0, 2}] = 1.5;
    const std::vector<double> phi = oracle_shapley(gt, {1.0, 1.0, 0.0});
    CHECK(phi[1] == 0.0);
  }
  SUBCASE("pure interaction z = x1 x2") {
    GroundTruthModel gt = zero_model(2);
    gt.interaction_weights[{0, 1}] = 1.0;
    const std::vector<double> phi = oracle_shapley(gt, {1.0, 1.0});
    CHECK(phi[0] == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(phi[1] == doctest::Approx(0.375).epsilon(1e-12));
  }
  SUBCASE("d > 16 rejected") {
    CHECK_THROWS_AS(oracle_shapley(zero_model(17), std::vector<double>(17, 0.0)),
                    std::runtime_error);
  }
}

TEST_CASE("oracle shapley efficiency and symmetry properties") {
  GroundTruthModel gt = zero_model(6);
  gt.bias = 0.3;
  gt.linear_weights = {0.5, -1.2, 0.0, 2.0, 0.7, 0.7};
  gt.feature_dists[3] = {FeatureKind::Continuous, 0.5, -2.0, 1.0};
  gt.interaction_weights[{0, 1}] = 1.1;
  gt.interaction_weights[{1, 3}] = -0.8;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(6);
    for (int j = 0; j < 6; ++j) {
      const FeatureDist& fd = gt.feature_dists[j];
      x[j] = fd.kind == FeatureKind::Binary ? (u(rng) < 0.5 ? 1.0 : 0.0)
                                            : fd.lo + (fd.hi - fd.lo) * u(rng);
    }
    const std::vector<double> phi = oracle_shapley(gt, x);
    // efficiency: sum phi = z(x) - E[z]
    double ez = gt.bias;
    for (int j = 0; j < 6; ++j) ez += gt.linear_weights[j] * gt.feature_dists[j].mean();
    for (const auto& [p, w] : gt.interaction_weights)
      ez += w * gt.feature_dists[p.first].mean() * gt.feature_dists[p.second].mean();
    double sum = 0;
    for (double v : phi) sum += v;
    CHECK(std::abs(sum - (gt.logit(x) - ez)) < 1e-9);
  }
  // symmetry: features 4 and 5 are interchangeable
  const std::vector<double> phi = oracle_shapley(gt, {1, 0, 1, 0.5, 1, 1});
  CHECK(phi[4] == doctest::Approx(phi[5]).epsilon(1e-12));
}

TEST_CASE("oracle shapley agrees with permutation Monte-Carlo") {
  GroundTruthModel gt = zero_model(5);
  gt.linear_weights = {1.0, -0.7, 0.0, 0.4, 0.9};
  gt.interaction_weights[{0, 4}] = 2.0;
  const std::vector<double> x = {1, 1, 0, 1, 1};
  const std::vector<double> exact = oracle_shapley(gt, x);
  const std::vector<double> mc = shapley_mc_oracle(gt, x, 200000, 4);
  for (int j = 0; j < 5; ++j) CHECK(std::abs(exact[j] - mc[j]) < 0.02);
}

TEST_CASE("bayes auroc") {
  SUBCASE("uninformative model is near 0.5") {
    const double a = bayes_auroc(zero_model(3), 20000, 1);
    CHECK(std::abs(a - 0.5) < 0.02);
  }
  SUBCASE("reproducible across seeds for a strong single weight") {
    GroundTruthModel gt = zero_model(3);
    gt.linear_weights[0] = 4.0;
    const double a = bayes_auroc(gt, 50000, 1);
    const double b = bayes_auroc(gt, 50000, 99);
    CHECK(std::abs(a - b) < 0.01);
  }
  SUBCASE("near-separable case") {
    GroundTruthModel gt = zero_model(2);
    gt.linear_weights = {40.0, 0.0};
    gt.bias = -20.0;
    CHECK(bayes_auroc(gt, 20000, 3) >= 0.99);
  }
  SUBCASE("n_mc too small rejected") {
    CHECK_THROWS_AS(bayes_auroc(zero_model(2), 10, 1), std::invalid_argument);
  }
}

TEST_CASE("planted ranking invariant to index permutation") {
  GroundTruthModel gt = zero_model(4);
  gt.interaction_weights[{0, 1}] = 0.5;
  gt.interaction_weights[{2, 3}] = -2.0;
  const GroundTruth g = make_ground_truth(gt, 2000, 1);
  REQUIRE(g.planted_interaction_ranking.size() == 2);
  CHECK(g.planted_interaction_ranking[0] == std::pair<int, int>{2, 3});

  // permute indices: 0<->3, 1<->2; rankings must name the same pairs under the map
  GroundTruthModel perm = zero_model(4);
  perm.interaction_weights[{2, 3}] = 0.5;   // image of (0,1)
  perm.interaction_weights[{0, 1}] = -2.0;  // image of (2,3)
  const GroundTruth gp = make_ground_truth(perm, 2000, 1);
  CHECK(gp.planted_interaction_ranking[0] == std::pair<int, int>{0, 1});
  CHECK(gp.planted_interaction_ranking[1] == std::pair<int, int>{2, 3});
}

TEST_CASE("ground truth file round-trip") {
  namespace fs = std::filesystem;
  GroundTruthModel gt = zero_model(3);
  gt.bias = -0.25;
  gt.linear_weights = {1.5, 0.0, -2.25};
  gt.feature_names = {"a", "b", "c"};
  gt.feature_dists[1] = {FeatureKind::Continuous, 0.5, -1.0, 2.0};
  gt.stage_tags = {1, 2, 3};
  gt.interaction_weights[{0, 2}] = 3.125;
  const fs::path p = fs::temp_directory_path() / "gxai_gt_rt.json";
  save_ground_truth(gt, p.string());
  const GroundTruthModel back = load_ground_truth(p.string());
  fs::remove(p);
  CHECK(back.bias == gt.bias);
  CHECK(back.linear_weights == gt.linear_weights);
  CHECK(back.interaction_weights.at({0, 2}) == 3.125);
  CHECK(back.feature_dists[1].lo == -1.0);
  CHECK(back.stage_tags == gt.stage_tags);
  CHECK(back.feature_names == gt.feature_names);
}
