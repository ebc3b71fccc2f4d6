#include <doctest.h>

#include <algorithm>

#include "intel/rng.hpp"
#include "intel/types.hpp"

using namespace intel;

TEST_CASE("derive_pi_order sorts by level descending") {
  auto order = derive_pi_order({1, 3, 0}, {"a", "b", "c"});
  CHECK(order == std::vector<int>{1, 0, 2});
}

TEST_CASE("derive_pi_order breaks ties by ascending item id") {
  auto order = derive_pi_order({2, 2}, {"b", "a"});
  CHECK(order == std::vector<int>{1, 0});
}

TEST_CASE("derive_pi_order all-tie identity") {
  auto order = derive_pi_order({0, 0, 0}, {"a", "b", "c"});
  CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("derive_pi_order rejects empty input") {
  CHECK_THROWS_AS(derive_pi_order({}, {}), Error);
}

TEST_CASE("derive_pi_order is a bijection and permutation-invariant") {
  Rng rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + rng.uniform_int(12);
    std::vector<int> levels(static_cast<size_t>(n));
    std::vector<std::string> ids(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      levels[static_cast<size_t>(i)] = rng.uniform_int(4);
      ids[static_cast<size_t>(i)] = "item" + std::to_string(rng.uniform_int(1000)) + "_" + std::to_string(i);
    }
    auto order = derive_pi_order(levels, ids);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);

    // Shuffle the items; the sequence of (level, id) pairs along pi must match.
    std::vector<int> perm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    rng.shuffle(perm);
    std::vector<int> levels2(static_cast<size_t>(n));
    std::vector<std::string> ids2(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      levels2[static_cast<size_t>(i)] = levels[static_cast<size_t>(perm[static_cast<size_t>(i)])];
      ids2[static_cast<size_t>(i)] = ids[static_cast<size_t>(perm[static_cast<size_t>(i)])];
    }
    auto order2 = derive_pi_order(levels2, ids2);
    for (int i = 0; i < n; ++i) {
      int a = order[static_cast<size_t>(i)];
      int b = order2[static_cast<size_t>(i)];
      CHECK(levels[static_cast<size_t>(a)] == levels2[static_cast<size_t>(b)]);
      CHECK(ids[static_cast<size_t>(a)] == ids2[static_cast<size_t>(b)]);
    }
  }
}

TEST_CASE("behavior sets validate contiguity") {
  auto tm = BehaviorSet::tmall();
  CHECK(tm.num_levels() == 4);
  CHECK(tm.num_positive() == 3);
  CHECK(tm.level_of("Buy") == 3);
  CHECK(tm.at(0).name == "Examine");
  CHECK_THROWS_AS(BehaviorSet::parse("Examine:0,Buy:2"), Error);
  auto parsed = BehaviorSet::parse("Examine:0,Click:1,Buy:2");
  CHECK(parsed.num_levels() == 3);
}

TEST_CASE("weight matrix simplex check and spread") {
  WeightMatrix w;
  w.values = {{0.25, 0.75}, {0.5, 0.5}};
  CHECK(w.rows_on_simplex());
  CHECK(w.spread() == doctest::Approx(0.25));
  w.values[0][0] = -0.1;
  w.values[0][1] = 1.1;
  CHECK_FALSE(w.rows_on_simplex());
}

TEST_CASE("intent distribution helpers") {
  auto u = IntentDistribution::uniform(12);
  CHECK(u.is_valid());
  CHECK(IntentDistribution::cell(1, 3, 8) == 11);
  IntentDistribution bad;
  bad.probs = {0.5, 0.4};
  CHECK_FALSE(bad.is_valid());
}
