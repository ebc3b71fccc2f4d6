#include "intel/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace intel {

BehaviorSet::BehaviorSet(std::vector<BehaviorLevel> levels) : levels_(std::move(levels)) {
  std::sort(levels_.begin(), levels_.end(),
            [](const BehaviorLevel& a, const BehaviorLevel& b) { return a.level < b.level; });
  for (int i = 0; i < static_cast<int>(levels_.size()); ++i) {
    if (levels_[i].level != i) {
      throw Error::validation("behavior levels must form a contiguous range 0..L-1");
    }
  }
  if (levels_.empty() || levels_[0].level != 0) {
    throw Error::validation("behavior set must contain level 0 (Examine)");
  }
}

BehaviorSet BehaviorSet::parse(const std::string& text) {
  std::vector<BehaviorLevel> levels;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto pos = tok.find(':');
    if (pos == std::string::npos) {
      throw Error::validation("behavior entry '" + tok + "' must be name:level");
    }
    BehaviorLevel b;
    b.name = tok.substr(0, pos);
    b.level = std::stoi(tok.substr(pos + 1));
    levels.push_back(std::move(b));
  }
  return BehaviorSet(std::move(levels));
}

BehaviorSet BehaviorSet::tmall() {
  return BehaviorSet({{"Examine", 0}, {"Click", 1}, {"Favorite", 2}, {"Buy", 3}});
}

BehaviorSet BehaviorSet::two_level() {
  return BehaviorSet({{"Examine", 0}, {"Click", 1}, {"Buy", 2}});
}

const BehaviorLevel& BehaviorSet::at(int level) const {
  if (level < 0 || level >= num_levels()) {
    throw Error::validation("behavior level " + std::to_string(level) + " out of range");
  }
  return levels_[level];
}

int BehaviorSet::level_of(const std::string& name) const {
  for (const auto& b : levels_) {
    if (b.name == name) return b.level;
  }
  throw Error::validation("unknown behavior '" + name + "'");
}

IntentDistribution IntentDistribution::uniform(int dim) {
  IntentDistribution d;
  d.probs.assign(static_cast<size_t>(dim), 1.0 / dim);
  return d;
}

bool IntentDistribution::is_valid(double tol) const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

bool WeightMatrix::rows_on_simplex(double tol) const {
  for (const auto& row : values) {
    double sum = 0.0;
    for (double w : row) {
      if (!(w >= 0.0)) return false;
      sum += w;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

double WeightMatrix::spread() const {
  double delta = 0.0;
  const int n = num_items();
  const int k = num_models();
  for (int c = 0; c < k; ++c) {
    double lo = 1.0, hi = 0.0;
    for (int r = 0; r < n; ++r) {
      lo = std::min(lo, values[r][c]);
      hi = std::max(hi, values[r][c]);
    }
    if (n > 0) delta = std::max(delta, hi - lo);
  }
  return delta;
}

std::vector<int> derive_pi_order(const std::vector<int>& levels,
                                 const std::vector<std::string>& item_ids) {
  if (levels.empty()) {
    throw Error::validation("EmptySession: cannot derive priority order of zero items");
  }
  if (levels.size() != item_ids.size()) {
    throw Error::validation("levels and item_ids length mismatch");
  }
  std::vector<int> order(levels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (levels[a] != levels[b]) return levels[a] > levels[b];
    return item_ids[a] < item_ids[b];
  });
  return order;
}

}  // namespace intel
