#pragma once

#include <vector>

#include "intel/losses.hpp"
#include "intel/types.hpp"

namespace intel {

// Per-item (or per-pair) per-model ambiguity entries with the weighted total
// that enters the training objective.
struct AmbiguityReport {
  std::vector<std::vector<double>> per_entry;  // N x K or |pairs| x K
  double weighted_total = 0.0;
};

// A_n^k = (S_n^k - S_n^ens)^2; weighted total is the mean over items of
// sum_k w_n^k A_n^k.
AmbiguityReport mse_ambiguity(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                              const WeightMatrix& w);

// Second-order term of the BPR loss around z^ens with the interpolation
// point taken at z^ens: A_nm^k = 1/2 sigma(z^ens)(1-sigma(z^ens)) (z^k-z^ens)^2.
// `printed_form` instead evaluates the paper-facsimile expression (inner
// weight sum, no 1/2) for side-by-side comparison; it never trains.
AmbiguityReport bpr_ambiguity(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                              const WeightMatrix& w, const BprPairSet& pairs,
                              bool printed_form = false);

// Positionwise listwise ambiguity along gt.pi_order:
// A_n^k = [sum_{m>n} exp(-z_nm^ens)(z_nm^k - z_nm^ens)]^2
//         / (1 + sum_{m>n} exp(-z_nm^ens))^2.
// `printed_form` puts exp(+z^ens) in the denominator as printed.
AmbiguityReport pl_ambiguity(const ScoreMatrix& s_basic, const EnsembleScores& s_ens,
                             const WeightMatrix& w, const GroundTruth& gt,
                             bool printed_form = false);

// KL(true || pred) with epsilon-smoothed predictions; 0 log 0 := 0.
double intent_kl(const IntentDistribution& true_int, const IntentDistribution& pred_int,
                 double epsilon = 1e-8);

// l_ens - alpha * A + gamma * l_int. Throws on non-finite components.
double joint_loss(double l_ens, double ambiguity, double l_int, double alpha, double gamma);

}  // namespace intel
