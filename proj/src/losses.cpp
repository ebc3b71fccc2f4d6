#include "intel/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace intel {

LossFamily loss_family_from_string(const std::string& s) {
  if (s == "mse") return LossFamily::mse;
  if (s == "bpr") return LossFamily::bpr;
  if (s == "pl") return LossFamily::pl;
  throw Error::validation("unknown loss family '" + s + "' (expected mse|bpr|pl)");
}

std::string to_string(LossFamily f) {
  switch (f) {
    case LossFamily::mse: return "mse";
    case LossFamily::bpr: return "bpr";
    case LossFamily::pl: return "pl";
  }
  return "?";
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double mse_loss(const GroundTruth& gt, const EnsembleScores& s) {
  const size_t n = s.values.size();
  if (n == 0) throw Error::validation("mse_loss: empty score list");
  if (gt.levels.size() != n) throw Error::validation("mse_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = s.values[i] - static_cast<double>(gt.levels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

std::vector<double> mse_loss_grad(const GroundTruth& gt, const EnsembleScores& s) {
  const size_t n = s.values.size();
  std::vector<double> g(n);
  for (size_t i = 0; i < n; ++i) {
    g[i] = 2.0 * (s.values[i] - static_cast<double>(gt.levels[i])) / static_cast<double>(n);
  }
  return g;
}

namespace {

std::map<int, std::vector<int>> by_level(const GroundTruth& gt) {
  std::map<int, std::vector<int>> pools;
  for (int i = 0; i < static_cast<int>(gt.levels.size()); ++i) {
    pools[gt.levels[i]].push_back(i);
  }
  return pools;
}

}  // namespace

BprPairSet sample_bpr_pairs(const GroundTruth& gt, uint64_t seed) {
  Rng rng(seed);
  BprPairSet out;
  auto pools = by_level(gt);
  for (int i = 0; i < static_cast<int>(gt.levels.size()); ++i) {
    int level = gt.levels[i];
    if (level < 1) continue;
    auto it = pools.find(level - 1);
    if (it == pools.end() || it->second.empty()) continue;  // empty lower level: skip
    int neg = it->second[static_cast<size_t>(rng.uniform_int(static_cast<int>(it->second.size())))];
    out.pairs.push_back({i, neg, level});
  }
  return out;
}

BprPairSet all_bpr_pairs(const GroundTruth& gt) {
  BprPairSet out;
  auto pools = by_level(gt);
  for (int i = 0; i < static_cast<int>(gt.levels.size()); ++i) {
    int level = gt.levels[i];
    if (level < 1) continue;
    auto it = pools.find(level - 1);
    if (it == pools.end()) continue;
    for (int neg : it->second) out.pairs.push_back({i, neg, level});
  }
  return out;
}

double bpr_loss(const EnsembleScores& s, const BprPairSet& pairs) {
  if (pairs.pairs.empty()) throw Error::validation("NoPairs: bpr_loss needs at least one pair");
  double acc = 0.0;
  for (const auto& p : pairs.pairs) {
    acc += softplus(-(s.values[static_cast<size_t>(p.positive)] -
                      s.values[static_cast<size_t>(p.negative)]));
  }
  return acc / static_cast<double>(pairs.pairs.size());
}

std::vector<double> bpr_loss_grad(const EnsembleScores& s, const BprPairSet& pairs) {
  if (pairs.pairs.empty()) throw Error::validation("NoPairs: bpr_loss needs at least one pair");
  std::vector<double> g(s.values.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(pairs.pairs.size());
  for (const auto& p : pairs.pairs) {
    double diff = s.values[static_cast<size_t>(p.positive)] -
                  s.values[static_cast<size_t>(p.negative)];
    double coeff = -(1.0 - sigmoid(diff)) * inv;  // d softplus(-x)/dx = -(1-sigma(x))
    g[static_cast<size_t>(p.positive)] += coeff;
    g[static_cast<size_t>(p.negative)] -= coeff;
  }
  return g;
}

double pl_loss(const GroundTruth& gt, const EnsembleScores& s) {
  const int n = static_cast<int>(s.values.size());
  if (n == 0) throw Error::validation("pl_loss: empty score list");
  if (static_cast<int>(gt.pi_order.size()) != n) {
    throw Error::validation("pl_loss: pi_order does not cover all items");
  }
  // g_n = LSE_{m>=n}(S_{pi_m}) - S_{pi_n}, accumulated over a backward sweep.
  double total = 0.0;
  double running_max = -std::numeric_limits<double>::infinity();
  double running_sum = 0.0;  // sum exp(S - running_max) over the tail
  for (int pos = n - 1; pos >= 0; --pos) {
    double sv = s.values[static_cast<size_t>(gt.pi_order[static_cast<size_t>(pos)])];
    if (sv > running_max) {
      running_sum = running_sum * std::exp(running_max - sv) + 1.0;
      running_max = sv;
    } else {
      running_sum += std::exp(sv - running_max);
    }
    total += running_max + std::log(running_sum) - sv;
  }
  return total;
}

std::vector<double> pl_loss_grad(const GroundTruth& gt, const EnsembleScores& s) {
  const int n = static_cast<int>(s.values.size());
  if (n == 0) throw Error::validation("pl_loss: empty score list");
  std::vector<double> g(s.values.size(), 0.0);
  // For position n: p_m = exp(S_m - S_n) / (1 + sum_{m'>n} exp(S_m' - S_n)),
  // grad wrt S_m is p_m (m>n) and wrt S_n is -sum p_m.
  for (int pos = 0; pos < n; ++pos) {
    int head = gt.pi_order[static_cast<size_t>(pos)];
    double sh = s.values[static_cast<size_t>(head)];
    double mx = sh;
    for (int t = pos + 1; t < n; ++t) {
      mx = std::max(mx, s.values[static_cast<size_t>(gt.pi_order[static_cast<size_t>(t)])]);
    }
    double denom = std::exp(sh - mx);
    for (int t = pos + 1; t < n; ++t) {
      denom += std::exp(s.values[static_cast<size_t>(gt.pi_order[static_cast<size_t>(t)])] - mx);
    }
    double tail_mass = 0.0;
    for (int t = pos + 1; t < n; ++t) {
      int m = gt.pi_order[static_cast<size_t>(t)];
      double p = std::exp(s.values[static_cast<size_t>(m)] - mx) / denom;
      g[static_cast<size_t>(m)] += p;
      tail_mass += p;
    }
    g[static_cast<size_t>(head)] -= tail_mass;
  }
  return g;
}

}  // namespace intel
