#pragma once

#include <cstdint>
#include <vector>

#include "intel/rng.hpp"
#include "intel/types.hpp"

namespace intel {

enum class LossFamily { mse, bpr, pl };

LossFamily loss_family_from_string(const std::string& s);
std::string to_string(LossFamily f);

// One BPR pair: the positive sits exactly one level above the negative.
struct BprPair {
  int positive = 0;
  int negative = 0;
  int level = 0;  // level of the positive item
};

struct BprPairSet {
  std::vector<BprPair> pairs;
};

// Numerically stable log(1 + exp(x)).
double softplus(double x);
double sigmoid(double x);

// Mean squared error against numeric levels: (1/N) sum (S_n - pi_n)^2.
double mse_loss(const GroundTruth& gt, const EnsembleScores& s);
// d(mse)/dS.
std::vector<double> mse_loss_grad(const GroundTruth& gt, const EnsembleScores& s);

// For each item at level l >= 1, pairs it with one uniformly sampled item
// from level l-1; positives whose lower level is empty are skipped.
BprPairSet sample_bpr_pairs(const GroundTruth& gt, uint64_t seed);
// Deterministic variant listing every (positive, one-level-lower) pair.
BprPairSet all_bpr_pairs(const GroundTruth& gt);

// (1/|pairs|) sum -log sigmoid(S_pos - S_neg). Throws NoPairs on empty input.
double bpr_loss(const EnsembleScores& s, const BprPairSet& pairs);
std::vector<double> bpr_loss_grad(const EnsembleScores& s, const BprPairSet& pairs);

// Plackett-Luce negative log likelihood up to the constant log N:
// sum_n log(1 + sum_{m>n} exp(-(S_{pi_n} - S_{pi_m}))) along gt.pi_order.
double pl_loss(const GroundTruth& gt, const EnsembleScores& s);
std::vector<double> pl_loss_grad(const GroundTruth& gt, const EnsembleScores& s);

}  // namespace intel
