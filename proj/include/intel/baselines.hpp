#pragma once

#include <string>
#include <vector>

#include "intel/types.hpp"

namespace intel {

// Items sorted by basic model k's scores descending, ties by ascending id.
std::vector<int> single_model(const ScoreMatrix& scores, int k,
                              const std::vector<std::string>& item_ids);

// Per-model rank lists over the candidate set: items the model proposed get
// ranks 1..n_k by score; items it never proposed are absent from its list.
std::vector<std::vector<int>> per_model_rankings(const ScoreMatrix& scores,
                                                 const std::vector<std::string>& item_ids);

// Average-rank aggregation; items missing from a list count as rank N+1.
// `rankings` hold item indices in rank order over a universe of n items.
std::vector<int> borda(const std::vector<std::vector<int>>& rankings, int n_items,
                       const std::vector<std::string>& item_ids);

// Robust rank aggregation: per item the normalized ranks r_k = rank_k / N
// (missing -> 1.0) are order-statistics-scored with rho = min_j Beta(r_(j); j,
// K-j+1); items sort ascending by rho.
std::vector<int> rra(const std::vector<std::vector<int>>& rankings, int n_items,
                     const std::vector<std::string>& item_ids);

// Regularized incomplete beta for integer parameters: P(Beta(a, b) <= x) with
// a = j, b = k - j + 1, evaluated as a binomial tail sum.
double beta_cdf_integer(double x, int j, int k);

// Convenience dispatch for "single:k" / "borda" / "rra" on one session.
std::vector<int> aggregate_session(const Session& session, const std::string& method);

}  // namespace intel
