#include <doctest.h>

#include <cmath>

#include "intel/ambiguity.hpp"
#include "intel/rng.hpp"

using namespace intel;

namespace {

ScoreMatrix make_scores(std::vector<std::vector<double>> values) {
  ScoreMatrix s;
  s.values = std::move(values);
  size_t k = s.values.empty() ? 0 : s.values[0].size();
  for (size_t c = 0; c < k; ++c) s.model_ids.push_back("m" + std::to_string(c));
  s.mask.assign(s.values.size(), std::vector<uint8_t>(k, 1));
  return s;
}

EnsembleScores combine(const ScoreMatrix& s, const WeightMatrix& w) {
  EnsembleScores out;
  for (int i = 0; i < s.num_items(); ++i) {
    double acc = 0.0;
    for (int c = 0; c < s.num_models(); ++c) {
      acc += w.values[static_cast<size_t>(i)][static_cast<size_t>(c)] *
             s.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
    }
    out.values.push_back(acc);
  }
  return out;
}

GroundTruth make_gt(std::vector<int> levels) {
  GroundTruth gt;
  std::vector<std::string> ids;
  for (size_t i = 0; i < levels.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%03zu", i);
    ids.push_back(buf);
  }
  gt.levels = std::move(levels);
  gt.pi_order = derive_pi_order(gt.levels, ids);
  return gt;
}

}  // namespace

TEST_CASE("mse_ambiguity direct evaluation") {
  auto s = make_scores({{0.0, 1.0}});
  WeightMatrix w;
  w.values = {{0.5, 0.5}};
  auto ens = combine(s, w);
  CHECK(ens.values[0] == doctest::Approx(0.5));
  auto rep = mse_ambiguity(s, ens, w);
  CHECK(rep.per_entry[0][0] == doctest::Approx(0.25));
  CHECK(rep.per_entry[0][1] == doctest::Approx(0.25));
  CHECK(rep.weighted_total == doctest::Approx(0.25));
}

TEST_CASE("mse_ambiguity zero for identical lists and one-hot weights") {
  auto s_same = make_scores({{0.3, 0.3}, {0.9, 0.9}});
  WeightMatrix w;
  w.values = {{0.2, 0.8}, {0.6, 0.4}};
  auto rep = mse_ambiguity(s_same, combine(s_same, w), w);
  CHECK(rep.weighted_total == doctest::Approx(0.0));

  auto s = make_scores({{0.1, 0.7}});
  WeightMatrix onehot;
  onehot.values = {{1.0, 0.0}};
  auto rep2 = mse_ambiguity(s, combine(s, onehot), onehot);
  CHECK(rep2.per_entry[0][0] == doctest::Approx(0.0));
  CHECK(rep2.weighted_total == doctest::Approx(0.0));
}

TEST_CASE("bpr_ambiguity direct evaluation") {
  // z^ens = 0, z^k - z^ens = 2, single model with weight 1 -> 1/2 * 0.25 * 4 = 0.5.
  ScoreMatrix s = make_scores({{1.0}, {-1.0}});
  WeightMatrix w;
  w.values = {{1.0}, {1.0}};
  EnsembleScores ens{{0.0, 0.0}};  // force z_ens = 0 while z^k = 2
  BprPairSet pairs;
  pairs.pairs = {{0, 1, 1}};
  auto rep = bpr_ambiguity(s, ens, w, pairs);
  CHECK(rep.per_entry[0][0] == doctest::Approx(0.5));
  CHECK(rep.weighted_total == doctest::Approx(0.5));
}

TEST_CASE("bpr_ambiguity zero spread and model-swap symmetry") {
  auto s = make_scores({{0.8, 0.8}, {0.1, 0.1}});
  WeightMatrix w;
  w.values = {{0.3, 0.7}, {0.3, 0.7}};
  auto ens = combine(s, w);
  BprPairSet pairs;
  pairs.pairs = {{0, 1, 1}};
  CHECK(bpr_ambiguity(s, ens, w, pairs).weighted_total == doctest::Approx(0.0));

  auto s1 = make_scores({{0.9, 0.2}, {0.1, 0.5}});
  WeightMatrix w1;
  w1.values = {{0.6, 0.4}, {0.6, 0.4}};
  auto s2 = make_scores({{0.2, 0.9}, {0.5, 0.1}});
  WeightMatrix w2;
  w2.values = {{0.4, 0.6}, {0.4, 0.6}};
  auto r1 = bpr_ambiguity(s1, combine(s1, w1), w1, pairs);
  auto r2 = bpr_ambiguity(s2, combine(s2, w2), w2, pairs);
  CHECK(r1.weighted_total == doctest::Approx(r2.weighted_total));
}

TEST_CASE("pl_ambiguity direct evaluation") {
  // N=2, z_12^ens = 0, z^k - z^ens = 1, w = 1 -> [1*1]^2 / (1+1)^2 = 0.25.
  ScoreMatrix s = make_scores({{0.5}, {-0.5}});
  WeightMatrix w;
  w.values = {{1.0}, {1.0}};
  EnsembleScores ens{{0.0, 0.0}};
  auto gt = make_gt({1, 0});
  auto rep = pl_ambiguity(s, ens, w, gt);
  CHECK(rep.per_entry[0][0] == doctest::Approx(0.25));
  CHECK(rep.per_entry[1][0] == doctest::Approx(0.0));  // last position: empty tail
  CHECK(rep.weighted_total == doctest::Approx(0.25));
}

TEST_CASE("pl_ambiguity zero report for N<2 and zero spread") {
  ScoreMatrix s = make_scores({{0.4, 0.4}});
  WeightMatrix w;
  w.values = {{0.5, 0.5}};
  auto rep = pl_ambiguity(s, combine(s, w), w, make_gt({1}));
  CHECK(rep.weighted_total == doctest::Approx(0.0));

  auto s_same = make_scores({{0.7, 0.7}, {0.2, 0.2}, {0.1, 0.1}});
  WeightMatrix w2;
  w2.values = {{0.4, 0.6}, {0.1, 0.9}, {0.8, 0.2}};
  auto rep2 = pl_ambiguity(s_same, combine(s_same, w2), w2, make_gt({2, 1, 0}));
  CHECK(rep2.weighted_total == doctest::Approx(0.0));
}

TEST_CASE("ambiguity terms are semi-positive on random inputs") {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    int n = 2 + rng.uniform_int(8);
    int k = 2 + rng.uniform_int(3);
    std::vector<std::vector<double>> vals(static_cast<size_t>(n),
                                          std::vector<double>(static_cast<size_t>(k)));
    WeightMatrix w;
    std::vector<int> levels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) vals[static_cast<size_t>(i)][static_cast<size_t>(c)] = rng.uniform();
      w.values.push_back(rng.dirichlet(k));
      levels[static_cast<size_t>(i)] = rng.uniform_int(3);
    }
    levels[0] = std::max(levels[0], 1);
    levels[static_cast<size_t>(n - 1)] = 0;
    auto s = make_scores(vals);
    auto ens = combine(s, w);
    auto gt = make_gt(levels);

    auto mse_rep = mse_ambiguity(s, ens, w);
    for (auto& row : mse_rep.per_entry)
      for (double a : row) CHECK(a >= 0.0);
    CHECK(mse_rep.weighted_total >= 0.0);

    auto pairs = sample_bpr_pairs(gt, static_cast<uint64_t>(t));
    if (!pairs.pairs.empty()) {
      auto bpr_rep = bpr_ambiguity(s, ens, w, pairs);
      for (auto& row : bpr_rep.per_entry)
        for (double a : row) CHECK(a >= 0.0);
      CHECK(bpr_rep.weighted_total >= 0.0);
    }

    auto pl_rep = pl_ambiguity(s, ens, w, gt);
    for (auto& row : pl_rep.per_entry)
      for (double a : row) CHECK(a >= 0.0);
    CHECK(pl_rep.weighted_total >= 0.0);
  }
}

TEST_CASE("intent_kl identities") {
  IntentDistribution p;
  p.probs = {0.25, 0.25, 0.5};
  CHECK(intent_kl(p, p) == doctest::Approx(0.0).epsilon(1e-6));

  IntentDistribution onehot, uniform;
  int dim = 12;
  onehot.probs.assign(static_cast<size_t>(dim), 0.0);
  onehot.probs[3] = 1.0;
  uniform = IntentDistribution::uniform(dim);
  CHECK(intent_kl(onehot, uniform) == doctest::Approx(std::log(dim)).epsilon(1e-6));

  IntentDistribution bad;
  bad.probs = {1.0};
  CHECK_THROWS_AS(intent_kl(onehot, bad), Error);
}

TEST_CASE("intent_kl is non-negative (Gibbs)") {
  Rng rng(303);
  for (int t = 0; t < 1000; ++t) {
    int dim = 2 + rng.uniform_int(12);
    IntentDistribution a, b;
    a.probs = rng.dirichlet(dim, 0.5);
    b.probs = rng.dirichlet(dim, 0.5);
    CHECK(intent_kl(a, b) >= -1e-9);
  }
}

TEST_CASE("joint_loss arithmetic and monotonicity in alpha") {
  CHECK(joint_loss(3.25, 0.7, 1.5, 0.0, 0.0) == doctest::Approx(3.25));
  CHECK(joint_loss(1.0, 0.5, 2.0, 0.1, 0.5) == doctest::Approx(1.95));
  double prev = joint_loss(1.0, 0.5, 2.0, 0.0, 0.5);
  for (double alpha = 0.1; alpha < 1.0; alpha += 0.1) {
    double cur = joint_loss(1.0, 0.5, 2.0, alpha, 0.5);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(joint_loss(std::nan(""), 0.0, 0.0, 0.1, 0.1), Error);
}
