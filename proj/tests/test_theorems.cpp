#include <doctest.h>

#include <cmath>

#include "intel/losses.hpp"
#include "intel/rng.hpp"
#include "intel/theorems.hpp"

using namespace intel;

TEST_CASE("taylor remainders match the located interpolation point") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    double z_ens = rng.uniform(-3.0, 3.0);
    double z_k = rng.uniform(-3.0, 3.0);
    auto [theta, match] = bpr_find_theta(z_ens, z_k);
    CHECK(theta >= 0.0);
    CHECK(theta <= 1.0);
    CHECK(std::abs(match) <= 1e-10);
    CHECK(bpr_taylor_remainder(z_ens, z_k) >= -1e-12);  // convex loss
  }
}

TEST_CASE("listwise remainder interpolation point exists in [0,1]") {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    int tail = 1 + rng.uniform_int(6);
    std::vector<double> ze(static_cast<size_t>(tail)), zk(static_cast<size_t>(tail));
    for (int i = 0; i < tail; ++i) {
      ze[static_cast<size_t>(i)] = rng.uniform(-2.0, 2.0);
      zk[static_cast<size_t>(i)] = rng.uniform(-2.0, 2.0);
    }
    auto [theta, match] = pl_find_theta(ze, zk);
    CHECK(theta >= 0.0);
    CHECK(theta <= 1.0);
    CHECK(std::abs(match) <= 1e-9);
    CHECK(pl_taylor_remainder(ze, zk) >= -1e-12);  // H is PSD
  }
}

TEST_CASE("verify_pointwise: K=1 and identical models give zero residual") {
  auto inst = random_instance(100, 1, 8, 0.3);
  auto res = verify_pointwise(inst);
  CHECK(res.max_abs_residual <= 1e-12);
  CHECK(res.holds);

  auto inst2 = random_instance(101, 3, 6, 0.3);
  for (auto& row : inst2.scores.values) {
    row[1] = row[0];
    row[2] = row[0];
  }
  auto res2 = verify_pointwise(inst2);
  CHECK(res2.max_abs_residual <= 1e-12);
  CHECK(res2.holds);
}

TEST_CASE("verify_pointwise rejects off-simplex weights") {
  auto inst = random_instance(5, 2, 4, 0.3);
  inst.weights.values[0][0] += 0.5;
  CHECK_THROWS_AS(verify_pointwise(inst), Error);
}

TEST_CASE("verify_pairwise: K=1 equality, identical models leave the correction term") {
  auto inst = random_instance(200, 1, 6, 0.3);
  auto res = verify_pairwise(inst);
  CHECK(std::abs(res.slack) <= 1e-9);  // delta=0, A=0, equal losses
  CHECK(res.holds);

  auto inst2 = random_instance(201, 3, 5, 0.3);
  for (auto& row : inst2.scores.values) {
    row[1] = row[0];
    row[2] = row[0];
  }
  auto res2 = verify_pairwise(inst2);
  CHECK(res2.holds);
  CHECK(res2.slack >= 0.0);  // slack = delta * sum S_m^k at the argmin pair
  CHECK(res2.weighted_ambiguity == doctest::Approx(0.0));
}

TEST_CASE("verify_pairwise rejects negative scores") {
  auto inst = random_instance(202, 2, 4, 0.3);
  inst.scores.values[0][0] = -0.2;
  CHECK_THROWS_AS(verify_pairwise(inst), Error);
}

TEST_CASE("verify_listwise: K=1 equality and zero-spread algebra") {
  auto inst = random_instance(300, 1, 6, 0.3);
  auto res = verify_listwise(inst);
  CHECK(std::abs(res.slack) <= 1e-9);
  CHECK(res.holds);

  // Identical models and delta=0: inequality reduces to sum_k w_max^k * l >= l.
  auto inst2 = random_instance(301, 3, 5, 0.0);
  for (auto& row : inst2.scores.values) {
    row[1] = row[0];
    row[2] = row[0];
  }
  inst2.delta = inst2.weights.spread();
  CHECK(inst2.delta <= 1e-12);
  auto res2 = verify_listwise(inst2);
  CHECK(res2.holds);
  CHECK(res2.weighted_ambiguity == doctest::Approx(0.0));
  CHECK(res2.correction_term == doctest::Approx(0.0));
  CHECK(res2.rhs >= res2.lhs - 1e-12);
}

TEST_CASE("random_instance respects delta_cap and determinism") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng pick(seed);
    double cap = pick.uniform();
    auto inst = random_instance(seed, 2 + pick.uniform_int(4), 2 + pick.uniform_int(20), cap);
    CHECK(inst.weights.spread() <= cap + 1e-12);
    CHECK(inst.weights.rows_on_simplex(1e-9));
    for (auto& row : inst.scores.values) {
      for (double v : row) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  auto a = random_instance(909, 3, 7, 0.2);
  auto b = random_instance(909, 3, 7, 0.2);
  CHECK(a.scores.values == b.scores.values);
  CHECK(a.weights.values == b.weights.values);
  CHECK(a.gt.levels == b.gt.levels);

  auto zero = random_instance(910, 4, 9, 0.0);
  for (int i = 1; i < zero.n_items; ++i) {
    for (int c = 0; c < zero.k_models; ++c) {
      CHECK(zero.weights.values[static_cast<size_t>(i)][static_cast<size_t>(c)] ==
            doctest::Approx(zero.weights.values[0][static_cast<size_t>(c)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("decompositions hold on a quick random sweep") {
  int holds = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    Rng pick(static_cast<uint64_t>(t) + 4000);
    int k = 2 + pick.uniform_int(4);
    int n = 2 + pick.uniform_int(14);
    auto inst = random_instance(static_cast<uint64_t>(t) + 888, k, n, 0.3);
    auto p = verify_pointwise(inst);
    auto b = verify_pairwise(inst);
    auto l = verify_listwise(inst);
    if (p.holds && b.holds && l.holds) ++holds;
  }
  CHECK(holds == trials);
}

TEST_CASE("slack shrinks as models and weights converge") {
  // Anneal scores toward their mean and weights toward list-level rows; the
  // pairwise and listwise slack should trend to zero.
  auto base = random_instance(555, 3, 8, 0.3);
  double prev_pair = std::numeric_limits<double>::infinity();
  double prev_list = std::numeric_limits<double>::infinity();
  int pair_violations = 0, list_violations = 0;
  for (double t : {1.0, 0.6, 0.3, 0.1, 0.0}) {
    VerifierInstance inst = base;
    for (int i = 0; i < inst.n_items; ++i) {
      double mean = 0.0;
      for (int c = 0; c < inst.k_models; ++c) mean += inst.scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
      mean /= inst.k_models;
      for (int c = 0; c < inst.k_models; ++c) {
        auto& v = inst.scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
        v = mean + t * (v - mean);
      }
    }
    std::vector<double> col_mean(static_cast<size_t>(inst.k_models), 0.0);
    for (auto& row : inst.weights.values)
      for (int c = 0; c < inst.k_models; ++c) col_mean[static_cast<size_t>(c)] += row[static_cast<size_t>(c)];
    for (auto& m : col_mean) m /= inst.n_items;
    for (auto& row : inst.weights.values)
      for (int c = 0; c < inst.k_models; ++c) {
        row[static_cast<size_t>(c)] = col_mean[static_cast<size_t>(c)] +
                                      t * (row[static_cast<size_t>(c)] - col_mean[static_cast<size_t>(c)]);
      }
    inst.delta = inst.weights.spread();
    auto b = verify_pairwise(inst);
    auto l = verify_listwise(inst);
    CHECK(b.holds);
    CHECK(l.holds);
    if (b.slack > prev_pair + 1e-9) ++pair_violations;
    if (l.slack > prev_list + 1e-9) ++list_violations;
    prev_pair = b.slack;
    prev_list = l.slack;
    if (t == 0.0) {
      CHECK(std::abs(b.slack) <= 1e-9);
      CHECK(std::abs(l.slack) <= 1e-9);
    }
  }
  CHECK(pair_violations <= 1);
  CHECK(list_violations <= 1);
}

TEST_CASE("run_verifier aggregates and is deterministic") {
  VerifierRunConfig cfg;
  cfg.trials = 25;
  cfg.k_models = 0;  // mixed K
  cfg.n_items = 0;   // mixed N
  cfg.delta_cap = 0.3;
  cfg.seed = 99;
  auto r1 = run_verifier(cfg);
  auto r2 = run_verifier(cfg);
  CHECK(r1.pass_count == 25);
  CHECK(r1.pass_count == r2.pass_count);
  CHECK(r1.min_slack_pairwise == r2.min_slack_pairwise);
  CHECK(r1.trials.size() == 25);
  CHECK(r1.max_pointwise_residual <= 1e-9);
}
