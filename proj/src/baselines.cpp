#include "intel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "intel/evaluation.hpp"

namespace intel {

std::vector<int> single_model(const ScoreMatrix& scores, int k,
                              const std::vector<std::string>& item_ids) {
  if (k < 0 || k >= scores.num_models()) {
    throw Error::validation("single_model: model index " + std::to_string(k) + " out of range");
  }
  std::vector<double> column(static_cast<size_t>(scores.num_items()));
  for (int i = 0; i < scores.num_items(); ++i) {
    column[static_cast<size_t>(i)] = scores.values[static_cast<size_t>(i)][static_cast<size_t>(k)];
  }
  return ranking_from_scores(column, item_ids);
}

std::vector<std::vector<int>> per_model_rankings(const ScoreMatrix& scores,
                                                 const std::vector<std::string>& item_ids) {
  std::vector<std::vector<int>> out;
  for (int k = 0; k < scores.num_models(); ++k) {
    std::vector<int> proposed;
    for (int i = 0; i < scores.num_items(); ++i) {
      if (scores.mask[static_cast<size_t>(i)][static_cast<size_t>(k)]) proposed.push_back(i);
    }
    std::sort(proposed.begin(), proposed.end(), [&](int a, int b) {
      double sa = scores.values[static_cast<size_t>(a)][static_cast<size_t>(k)];
      double sb = scores.values[static_cast<size_t>(b)][static_cast<size_t>(k)];
      if (sa != sb) return sa > sb;
      return item_ids[static_cast<size_t>(a)] < item_ids[static_cast<size_t>(b)];
    });
    out.push_back(std::move(proposed));
  }
  return out;
}

std::vector<int> borda(const std::vector<std::vector<int>>& rankings, int n_items,
                       const std::vector<std::string>& item_ids) {
  if (rankings.empty()) throw Error::validation("borda: no input rankings");
  std::vector<double> mean_rank(static_cast<size_t>(n_items), 0.0);
  for (const auto& list : rankings) {
    std::vector<double> rank(static_cast<size_t>(n_items),
                             static_cast<double>(n_items + 1));  // missing items
    for (size_t pos = 0; pos < list.size(); ++pos) {
      rank[static_cast<size_t>(list[pos])] = static_cast<double>(pos + 1);
    }
    for (int i = 0; i < n_items; ++i) mean_rank[static_cast<size_t>(i)] += rank[static_cast<size_t>(i)];
  }
  for (auto& r : mean_rank) r /= static_cast<double>(rankings.size());
  std::vector<int> order(static_cast<size_t>(n_items));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (mean_rank[static_cast<size_t>(a)] != mean_rank[static_cast<size_t>(b)]) {
      return mean_rank[static_cast<size_t>(a)] < mean_rank[static_cast<size_t>(b)];
    }
    return item_ids[static_cast<size_t>(a)] < item_ids[static_cast<size_t>(b)];
  });
  return order;
}

double beta_cdf_integer(double x, int j, int k) {
  // P(at least j of k iid U[0,1] are <= x) = sum_{i=j}^{k} C(k,i) x^i (1-x)^{k-i}.
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double acc = 0.0;
  for (int i = j; i <= k; ++i) {
    double binom = 1.0;
    for (int t = 0; t < i; ++t) {
      binom = binom * static_cast<double>(k - t) / static_cast<double>(t + 1);
    }
    acc += binom * std::pow(x, i) * std::pow(1.0 - x, k - i);
  }
  return std::min(1.0, acc);
}

std::vector<int> rra(const std::vector<std::vector<int>>& rankings, int n_items,
                     const std::vector<std::string>& item_ids) {
  if (n_items < 1) throw Error::validation("rra: empty item universe");
  const int k = static_cast<int>(rankings.size());
  if (k < 1) throw Error::validation("rra: no input rankings");
  std::vector<double> rho(static_cast<size_t>(n_items), 1.0);
  for (int i = 0; i < n_items; ++i) {
    std::vector<double> r(static_cast<size_t>(k), 1.0);  // missing -> worst
    for (int c = 0; c < k; ++c) {
      const auto& list = rankings[static_cast<size_t>(c)];
      for (size_t pos = 0; pos < list.size(); ++pos) {
        if (list[pos] == i) {
          r[static_cast<size_t>(c)] = static_cast<double>(pos + 1) / static_cast<double>(n_items);
          break;
        }
      }
    }
    std::sort(r.begin(), r.end());
    double best = 1.0;
    for (int j = 1; j <= k; ++j) {
      best = std::min(best, beta_cdf_integer(r[static_cast<size_t>(j - 1)], j, k));
    }
    rho[static_cast<size_t>(i)] = best;
  }
  std::vector<int> order(static_cast<size_t>(n_items));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (rho[static_cast<size_t>(a)] != rho[static_cast<size_t>(b)]) {
      return rho[static_cast<size_t>(a)] < rho[static_cast<size_t>(b)];
    }
    return item_ids[static_cast<size_t>(a)] < item_ids[static_cast<size_t>(b)];
  });
  return order;
}

std::vector<int> aggregate_session(const Session& session, const std::string& method) {
  std::vector<std::string> ids;
  for (const auto& c : session.record.candidates) ids.push_back(c.item_id);
  if (method.rfind("single:", 0) == 0) {
    const std::string which = method.substr(7);
    int k = -1;
    for (int c = 0; c < session.scores.num_models(); ++c) {
      if (session.scores.model_ids[static_cast<size_t>(c)] == which) k = c;
    }
    if (k < 0) {
      try {
        k = std::stoi(which);
      } catch (const std::exception&) {
        throw Error::validation("aggregate: unknown model '" + which + "'");
      }
    }
    return single_model(session.scores, k, ids);
  }
  auto lists = per_model_rankings(session.scores, ids);
  if (method == "borda") return borda(lists, session.scores.num_items(), ids);
  if (method == "rra") return rra(lists, session.scores.num_items(), ids);
  throw Error::validation("aggregate: unknown method '" + method + "' (expected single:k|borda|rra)");
}

}  // namespace intel
