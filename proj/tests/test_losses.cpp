#include <doctest.h>

#include <cmath>
#include <set>

#include "intel/losses.hpp"
#include "intel/rng.hpp"

using namespace intel;

namespace {

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

// Central finite differences of a scalar function of a score vector.
template <typename F>
std::vector<double> fd_grad(F f, std::vector<double> s, double h = 1e-5) {
  std::vector<double> g(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    double keep = s[i];
    s[i] = keep + h;
    double up = f(s);
    s[i] = keep - h;
    double dn = f(s);
    s[i] = keep;
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

void check_grad_match(const std::vector<double>& analytic, const std::vector<double>& fd) {
  REQUIRE(analytic.size() == fd.size());
  for (size_t i = 0; i < analytic.size(); ++i) {
    double denom = std::max({std::abs(analytic[i]), std::abs(fd[i]), 1e-6});
    CHECK(std::abs(analytic[i] - fd[i]) / denom <= 1e-4);
  }
}

}  // namespace

TEST_CASE("mse_loss matches direct evaluation") {
  CHECK(mse_loss(make_gt({1, 0}), {{1.0, 0.0}}) == doctest::Approx(0.0));
  CHECK(mse_loss(make_gt({2, 0}), {{1.0, 1.0}}) == doctest::Approx(1.0));
}

TEST_CASE("mse_loss shift identity") {
  // Adding constant c changes the loss by c^2 + 2c*mean(S - pi).
  Rng rng(99);
  for (int t = 0; t < 50; ++t) {
    int n = 2 + rng.uniform_int(8);
    std::vector<int> levels(static_cast<size_t>(n));
    EnsembleScores s;
    for (int i = 0; i < n; ++i) {
      levels[static_cast<size_t>(i)] = rng.uniform_int(3);
      s.values.push_back(rng.uniform(-2.0, 2.0));
    }
    auto gt = make_gt(levels);
    double base = mse_loss(gt, s);
    double c = rng.uniform(-1.0, 1.0);
    double mean_diff = 0.0;
    EnsembleScores shifted = s;
    for (int i = 0; i < n; ++i) {
      mean_diff += (s.values[static_cast<size_t>(i)] - levels[static_cast<size_t>(i)]) / n;
      shifted.values[static_cast<size_t>(i)] += c;
    }
    CHECK(mse_loss(gt, shifted) == doctest::Approx(base + c * c + 2.0 * c * mean_diff));
  }
}

TEST_CASE("sample_bpr_pairs pairs each positive with one item a level below") {
  // buy=a(idx0), click=b(idx1), examine=c(idx2): the only options are (0,1),(1,2).
  auto gt = make_gt({2, 1, 0});
  auto pairs = sample_bpr_pairs(gt, 7);
  REQUIRE(pairs.pairs.size() == 2);
  std::set<std::pair<int, int>> got;
  for (auto& p : pairs.pairs) got.insert({p.positive, p.negative});
  CHECK(got == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("sample_bpr_pairs skips positives with an empty lower level") {
  auto gt = make_gt({1, 1});  // no examine items at all
  auto pairs = sample_bpr_pairs(gt, 3);
  CHECK(pairs.pairs.empty());
}

TEST_CASE("sample_bpr_pairs is seed-deterministic") {
  auto gt = make_gt({2, 1, 1, 0, 0, 0, 1});
  auto a = sample_bpr_pairs(gt, 42);
  auto b = sample_bpr_pairs(gt, 42);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].positive == b.pairs[i].positive);
    CHECK(a.pairs[i].negative == b.pairs[i].negative);
  }
}

TEST_CASE("bpr_loss frozen values") {
  BprPairSet pairs;
  pairs.pairs = {{0, 1, 1}};
  CHECK(bpr_loss({{0.5, 0.5}}, pairs) == doctest::Approx(std::log(2.0)));
  CHECK(bpr_loss({{20.5, 0.5}}, pairs) < 1e-8);
  pairs.pairs = {{0, 1, 1}, {2, 3, 1}};
  CHECK(bpr_loss({{1.0, 1.0, 2.0, 2.0}}, pairs) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(bpr_loss({{1.0}}, BprPairSet{}), Error);
}

TEST_CASE("bpr_loss is shift invariant and monotone in the gap") {
  BprPairSet pairs;
  pairs.pairs = {{0, 1, 1}};
  double prev = bpr_loss({{0.0, 0.5}}, pairs);
  for (double gap = -0.4; gap < 2.0; gap += 0.1) {
    double cur = bpr_loss({{gap, 0.0}}, pairs);
    double shifted = bpr_loss({{gap + 3.7, 3.7}}, pairs);
    CHECK(shifted == doctest::Approx(cur));
    if (gap > -0.5 + 0.1) CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("pl_loss frozen values") {
  CHECK(pl_loss(make_gt({1}), {{0.3}}) == doctest::Approx(0.0));
  CHECK(pl_loss(make_gt({1, 0}), {{0.7, 0.7}}) == doctest::Approx(std::log(2.0)));
  CHECK(pl_loss(make_gt({1, 0}), {{20.0, 0.0}}) < 1e-8);
}

TEST_CASE("pl_loss is shift invariant, mse is not") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    int n = 2 + rng.uniform_int(6);
    std::vector<int> levels(static_cast<size_t>(n));
    EnsembleScores s;
    for (int i = 0; i < n; ++i) {
      levels[static_cast<size_t>(i)] = rng.uniform_int(3);
      s.values.push_back(rng.uniform(-1.0, 1.0));
    }
    auto gt = make_gt(levels);
    EnsembleScores shifted = s;
    for (auto& v : shifted.values) v += 2.34;
    CHECK(pl_loss(gt, shifted) == doctest::Approx(pl_loss(gt, s)));
    CHECK(mse_loss(gt, shifted) != doctest::Approx(mse_loss(gt, s)).epsilon(1e-9));
  }
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    int n = 2 + rng.uniform_int(8);
    std::vector<int> levels(static_cast<size_t>(n));
    bool has_pos = false, has_zero = false;
    for (int i = 0; i < n; ++i) {
      levels[static_cast<size_t>(i)] = rng.uniform_int(3);
      has_pos |= levels[static_cast<size_t>(i)] > 0;
      has_zero |= levels[static_cast<size_t>(i)] == 0;
    }
    if (!has_pos) levels[0] = 1;
    if (!has_zero) levels[static_cast<size_t>(n - 1)] = 0;
    auto gt = make_gt(levels);
    std::vector<double> s(static_cast<size_t>(n));
    for (auto& v : s) v = rng.uniform(-1.5, 1.5);

    auto mse_f = [&](const std::vector<double>& x) { return mse_loss(gt, {x}); };
    check_grad_match(mse_loss_grad(gt, {s}), fd_grad(mse_f, s));

    auto pl_f = [&](const std::vector<double>& x) { return pl_loss(gt, {x}); };
    check_grad_match(pl_loss_grad(gt, {s}), fd_grad(pl_f, s));

    auto pairs = sample_bpr_pairs(gt, static_cast<uint64_t>(t));
    if (!pairs.pairs.empty()) {
      auto bpr_f = [&](const std::vector<double>& x) { return bpr_loss({x}, pairs); };
      check_grad_match(bpr_loss_grad({s}, pairs), fd_grad(bpr_f, s));
    }
  }
}

TEST_CASE("losses are non-negative") {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    int n = 1 + rng.uniform_int(10);
    std::vector<int> levels(static_cast<size_t>(n));
    std::vector<double> s(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      levels[static_cast<size_t>(i)] = rng.uniform_int(4);
      s[static_cast<size_t>(i)] = rng.uniform(-3.0, 3.0);
    }
    auto gt = make_gt(levels);
    CHECK(mse_loss(gt, {s}) >= 0.0);
    CHECK(pl_loss(gt, {s}) >= 0.0);
  }
}
