#include "intel/ambiguity.hpp"

#include <cmath>

namespace intel {

namespace {

void check_shapes(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                  const WeightMatrix& w, const char* op) {
  const int n = s_basic.num_items();
  const int k = s_basic.num_models();
  if (static_cast<int>(s_ens.values.size()) != n || w.num_items() != n || w.num_models() != k) {
    throw Error::validation(std::string(op) + ": shape mismatch between scores and weights");
  }
}

}  // namespace

AmbiguityReport mse_ambiguity(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                              const WeightMatrix& w) {
  check_shapes(s_basic, s_ens, w, "mse_ambiguity");
  const int n = s_basic.num_items();
  const int k = s_basic.num_models();
  if (n == 0) throw Error::validation("mse_ambiguity: empty session");
  AmbiguityReport rep;
  rep.per_entry.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(k), 0.0));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) {
      double d = s_basic.values[static_cast<size_t>(i)][static_cast<size_t>(c)] -
                 s_ens.values[static_cast<size_t>(i)];
      double a = d * d;
      rep.per_entry[static_cast<size_t>(i)][static_cast<size_t>(c)] = a;
      total += w.values[static_cast<size_t>(i)][static_cast<size_t>(c)] * a;
    }
  }
  rep.weighted_total = total / static_cast<double>(n);
  return rep;
}

AmbiguityReport bpr_ambiguity(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                              const WeightMatrix& w, const BprPairSet& pairs,
                              bool printed_form) {
  check_shapes(s_basic, s_ens, w, "bpr_ambiguity");
  if (pairs.pairs.empty()) throw Error::validation("bpr_ambiguity: empty pair set");
  const int k = s_basic.num_models();
  AmbiguityReport rep;
  rep.per_entry.assign(pairs.pairs.size(), std::vector<double>(static_cast<size_t>(k), 0.0));
  double total = 0.0;
  for (size_t p = 0; p < pairs.pairs.size(); ++p) {
    const auto& pr = pairs.pairs[p];
    const size_t n = static_cast<size_t>(pr.positive);
    const size_t m = static_cast<size_t>(pr.negative);
    double z_ens = s_ens.values[n] - s_ens.values[m];
    double sg = sigmoid(z_ens);
    double curvature = sg * (1.0 - sg);
    double weighted_sq = 0.0;  // sum_k w_n^k (z^k - z^ens)^2
    for (int c = 0; c < k; ++c) {
      double z_k = s_basic.values[n][static_cast<size_t>(c)] -
                   s_basic.values[m][static_cast<size_t>(c)];
      double d = z_k - z_ens;
      weighted_sq += w.values[n][static_cast<size_t>(c)] * d * d;
      rep.per_entry[p][static_cast<size_t>(c)] = 0.5 * curvature * d * d;
    }
    if (printed_form) {
      // Facsimile of the printed equation: every A_nm^k carries the full
      // inner weighted sum and no Taylor 1/2.
      for (int c = 0; c < k; ++c) {
        rep.per_entry[p][static_cast<size_t>(c)] = curvature * weighted_sq;
      }
      double pair_total = 0.0;
      for (int c = 0; c < k; ++c) {
        pair_total += w.values[n][static_cast<size_t>(c)] * rep.per_entry[p][static_cast<size_t>(c)];
      }
      total += pair_total;
    } else {
      total += 0.5 * curvature * weighted_sq;
    }
  }
  rep.weighted_total = total / static_cast<double>(pairs.pairs.size());
  return rep;
}

AmbiguityReport pl_ambiguity(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                             const WeightMatrix& w, const GroundTruth& gt,
                             bool printed_form) {
  check_shapes(s_basic, s_ens, w, "pl_ambiguity");
  const int n = s_basic.num_items();
  const int k = s_basic.num_models();
  AmbiguityReport rep;
  rep.per_entry.assign(static_cast<size_t>(std::max(n, 0)),
                       std::vector<double>(static_cast<size_t>(k), 0.0));
  rep.weighted_total = 0.0;
  if (n < 2) return rep;  // no pairs to compare; zero report by contract
  if (static_cast<int>(gt.pi_order.size()) != n) {
    throw Error::validation("pl_ambiguity: pi_order does not cover all items");
  }
  for (int pos = 0; pos < n; ++pos) {
    const size_t head = static_cast<size_t>(gt.pi_order[static_cast<size_t>(pos)]);
    double denom = 1.0;
    std::vector<double> numer(static_cast<size_t>(k), 0.0);
    for (int t = pos + 1; t < n; ++t) {
      const size_t tail = static_cast<size_t>(gt.pi_order[static_cast<size_t>(t)]);
      double z_ens = s_ens.values[head] - s_ens.values[tail];
      double e = std::exp(-z_ens);
      denom += printed_form ? std::exp(z_ens) : e;
      for (int c = 0; c < k; ++c) {
        double z_k = s_basic.values[head][static_cast<size_t>(c)] -
                     s_basic.values[tail][static_cast<size_t>(c)];
        numer[static_cast<size_t>(c)] += e * (z_k - z_ens);
      }
    }
    for (int c = 0; c < k; ++c) {
      double a = (numer[static_cast<size_t>(c)] / denom) * (numer[static_cast<size_t>(c)] / denom);
      rep.per_entry[static_cast<size_t>(pos)][static_cast<size_t>(c)] = a;
      rep.weighted_total += w.values[head][static_cast<size_t>(c)] * a;
    }
  }
  return rep;
}

double intent_kl(const IntentDistribution& true_int, const IntentDistribution& pred_int,
                 double epsilon) {
  if (true_int.dim() != pred_int.dim()) {
    throw Error::validation("intent_kl: dimension mismatch");
  }
  double kl = 0.0;
  for (int i = 0; i < true_int.dim(); ++i) {
    double t = true_int.probs[static_cast<size_t>(i)];
    if (t <= 0.0) continue;  // 0 log(0/x) := 0
    kl += t * (std::log(t) - std::log(pred_int.probs[static_cast<size_t>(i)] + epsilon));
  }
  return kl;
}

double joint_loss(double l_ens, double ambiguity, double l_int, double alpha, double gamma) {
  if (!std::isfinite(l_ens)) throw Error::runtime("joint_loss: non-finite l_ens");
  if (!std::isfinite(ambiguity)) throw Error::runtime("joint_loss: non-finite ambiguity");
  if (!std::isfinite(l_int)) throw Error::runtime("joint_loss: non-finite l_int");
  return l_ens - alpha * ambiguity + gamma * l_int;
}

}  // namespace intel
