#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intel/types.hpp"

namespace intel {

// Randomized instance for the error-ambiguity decomposition checks.
struct VerifierInstance {
  int k_models = 2;
  int n_items = 2;
  ScoreMatrix scores;   // values in [0,1], full mask
  WeightMatrix weights; // rows on the simplex
  double delta = 0.0;   // realized weight spread
  GroundTruth gt;
  uint64_t seed = 0;
};

struct VerificationResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;          // rhs - lhs (min over pairs for the pairwise check)
  bool holds = false;
  double max_abs_residual = 0.0;  // pointwise identity only
  // Decomposition components on the rhs:
  double weighted_basic_loss = 0.0;
  double correction_term = 0.0;
  double weighted_ambiguity = 0.0;
};

// Exact second-order Lagrange remainder of f expanded around `a`, evaluated
// at `b`:  f(b) - f(a) - f'(a) (b - a).  For the BPR loss f = softplus(-z).
double bpr_taylor_remainder(double z_ens, double z_k);

// Locates theta in [0,1] with 1/2 f''(a + theta (b-a)) (b-a)^2 equal to the
// remainder above (exists by Taylor's theorem). Returns theta and the match
// residual at the located point.
std::pair<double, double> bpr_find_theta(double z_ens, double z_k);

// Listwise analogue over the tail-difference vectors at one position:
// g(v) = log(1 + sum exp(-v_m)).
double pl_taylor_remainder(const std::vector<double>& z_ens_tail,
                           const std::vector<double>& z_k_tail);
std::pair<double, double> pl_find_theta(const std::vector<double>& z_ens_tail,
                                        const std::vector<double>& z_k_tail);

// Theorem 1: exact pointwise identity
//   l_m(pi_n, S_n^ens) = sum_k w_n^k l_m(pi_n, S_n^k) - sum_k w_n^k (S_n^k - S_n^ens)^2.
// holds iff the max per-item residual <= 1e-9.
VerificationResult verify_pointwise(const VerifierInstance& inst);

// Theorem 2: for every ordered pair (n,m), n != m,
//   l_b(z^ens) <= sum_k w_n^k l_b(z^k) + delta sum_k S_m^k - sum_k w_n^k A_nm^k
// with A the exact Taylor remainder. Reports min slack; holds iff >= -1e-7.
VerificationResult verify_pairwise(const VerifierInstance& inst);

// Theorem 3:
//   l_pl(pi, S^ens) <= sum_k w_max^k l_pl(pi, S^k) + delta N S_sum^max
//                      - sum_k sum_n w_n^k A_n^k
// with positionwise exact remainders. holds iff slack >= -1e-7.
VerificationResult verify_listwise(const VerifierInstance& inst);

// Scores ~ U[0,1]; Dirichlet weight rows shrunk toward their column mean so
// the realized spread is <= delta_cap; levels uniform in {0..num_levels-1}.
VerifierInstance random_instance(uint64_t seed, int k_models, int n_items, double delta_cap,
                                 int num_levels = 3);

struct TrialReport {
  uint64_t seed = 0;
  VerificationResult pointwise;
  VerificationResult pairwise;
  VerificationResult listwise;
  bool all_hold() const { return pointwise.holds && pairwise.holds && listwise.holds; }
};

struct VerifierRunConfig {
  int trials = 1000;
  int k_models = 3;     // <= 0 draws K from {2,3,5} per trial
  int n_items = 0;      // <= 0 draws N from {2..50} per trial
  double delta_cap = 0.3;
  uint64_t seed = 7;
  int num_levels = 3;
  std::string counterexample_dir;  // where violations are dumped, if any
};

struct VerifierRunReport {
  VerifierRunConfig config;
  std::vector<TrialReport> trials;
  int pass_count = 0;
  double min_slack_pairwise = 0.0;
  double min_slack_listwise = 0.0;
  double mean_slack_pairwise = 0.0;
  double mean_slack_listwise = 0.0;
  double max_pointwise_residual = 0.0;
  std::vector<std::string> counterexample_paths;
};

VerifierRunReport run_verifier(const VerifierRunConfig& cfg);

// Serializes the report (and any counterexamples) as JSON.
void write_verifier_report(const VerifierRunReport& report, const std::string& path);
std::string instance_to_json(const VerifierInstance& inst);

}  // namespace intel
