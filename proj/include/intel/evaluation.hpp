#pragma once

#include <map>
#include <string>
#include <vector>

#include "intel/types.hpp"

namespace intel {

// Sorts item indices by score descending, ties by ascending item_id.
std::vector<int> ranking_from_scores(const std::vector<double>& scores,
                                     const std::vector<std::string>& item_ids);

// DCG@k with gain 2^r - 1 and discount log2(p+1), normalized by the ideal
// DCG. All-zero relevance scores 0 by convention.
double ndcg_at_k(const std::vector<int>& ranking, const std::vector<double>& relevance, int k);

enum class PerBehaviorMode { threshold, exact };

// objective "all" returns the numeric levels; a behavior name returns binary
// relevance (threshold mode: level >= level(b); exact mode: level == level(b)).
std::vector<double> per_objective_relevance(const GroundTruth& gt, const std::string& objective,
                                            const BehaviorSet& behaviors,
                                            PerBehaviorMode mode = PerBehaviorMode::threshold);

enum class IntentMetricMode { macro_f1, ndcg10 };

// ndcg10 ranks intent cells by predicted probability (ties by ascending cell
// index) against the true probabilities as gains. macro_f1 binarizes both
// sides at threshold 1/(2 dim) and averages per-cell F1 over supported cells.
double intent_metrics(const IntentDistribution& true_int, const IntentDistribution& pred_int,
                      IntentMetricMode mode, double binarize_threshold_scale = 0.5);

struct MetricAggregate {
  double mean = 0.0;
  double stddev = 0.0;
  int n_sessions = 0;
  std::vector<double> per_seed;
};

struct MetricsReport {
  std::map<std::string, MetricAggregate> metrics;
};

struct EvalConfig {
  std::vector<int> ks = {3, 5, 10};
  std::vector<std::string> objectives;  // empty: "all" + every positive behavior
  PerBehaviorMode per_behavior_mode = PerBehaviorMode::threshold;
};

struct RunOutputs {
  std::map<std::string, std::vector<int>> rankings;  // session_id -> item-index permutation
  std::map<std::string, IntentDistribution> predicted_intents;  // optional
};

// Session-level NDCG per objective per cutoff averaged uniformly over
// sessions; adds Intent-NDCG@10 / Intent-MacroF1 when predictions are given.
MetricsReport evaluate_run(const std::vector<Session>& sessions, const RunOutputs& outputs,
                           const BehaviorSet& behaviors, const EvalConfig& cfg);

// Combines per-seed reports into mean / std / per_seed.
MetricsReport aggregate_seed_reports(const std::vector<MetricsReport>& reports);

std::string metrics_to_json(const MetricsReport& report);
void write_metrics_json(const MetricsReport& report, const std::string& path);

}  // namespace intel
