#include "intel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "intel/ambiguity.hpp"

namespace intel {

std::vector<int> ranking_from_scores(const std::vector<double>& scores,
                                     const std::vector<std::string>& item_ids) {
  if (scores.size() != item_ids.size()) {
    throw Error::validation("ranking_from_scores: length mismatch");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)]) {
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    }
    return item_ids[static_cast<size_t>(a)] < item_ids[static_cast<size_t>(b)];
  });
  return order;
}

namespace {

double dcg(const std::vector<double>& gains_in_rank_order, int k) {
  double acc = 0.0;
  const int limit = std::min<int>(k, static_cast<int>(gains_in_rank_order.size()));
  for (int p = 0; p < limit; ++p) {
    acc += gains_in_rank_order[static_cast<size_t>(p)] / std::log2(static_cast<double>(p) + 2.0);
  }
  return acc;
}

double gain(double rel) { return std::pow(2.0, rel) - 1.0; }

}  // namespace

double ndcg_at_k(const std::vector<int>& ranking, const std::vector<double>& relevance, int k) {
  if (k < 1) throw Error::validation("ndcg_at_k: k must be >= 1");
  if (ranking.size() != relevance.size()) {
    throw Error::validation("ndcg_at_k: ranking does not cover the relevance vector");
  }
  for (double r : relevance) {
    if (r < 0.0) throw Error::validation("ndcg_at_k: negative relevance");
  }
  std::vector<double> ranked(ranking.size());
  for (size_t p = 0; p < ranking.size(); ++p) {
    ranked[p] = gain(relevance[static_cast<size_t>(ranking[p])]);
  }
  std::vector<double> ideal(relevance.size());
  for (size_t i = 0; i < relevance.size(); ++i) ideal[i] = gain(relevance[i]);
  std::sort(ideal.begin(), ideal.end(), std::greater<double>());
  const double idcg = dcg(ideal, k);
  if (idcg <= 0.0) return 0.0;  // all-zero relevance
  return dcg(ranked, k) / idcg;
}

std::vector<double> per_objective_relevance(const GroundTruth& gt, const std::string& objective,
                                            const BehaviorSet& behaviors, PerBehaviorMode mode) {
  std::vector<double> rel(gt.levels.size(), 0.0);
  if (objective == "all") {
    for (size_t i = 0; i < gt.levels.size(); ++i) rel[i] = static_cast<double>(gt.levels[i]);
    return rel;
  }
  const int target = behaviors.level_of(objective);
  if (target < 1) {
    throw Error::validation("per_objective_relevance: objective must be a positive behavior");
  }
  for (size_t i = 0; i < gt.levels.size(); ++i) {
    const bool hit = mode == PerBehaviorMode::threshold ? gt.levels[i] >= target
                                                        : gt.levels[i] == target;
    rel[i] = hit ? 1.0 : 0.0;
  }
  return rel;
}

double intent_metrics(const IntentDistribution& true_int, const IntentDistribution& pred_int,
                      IntentMetricMode mode, double binarize_threshold_scale) {
  if (true_int.dim() != pred_int.dim()) {
    throw Error::validation("intent_metrics: dimension mismatch");
  }
  const int dim = true_int.dim();
  if (mode == IntentMetricMode::ndcg10) {
    std::vector<std::string> cell_ids(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "c%06d", i);
      cell_ids[static_cast<size_t>(i)] = buf;
    }
    auto ranking = ranking_from_scores(pred_int.probs, cell_ids);
    return ndcg_at_k(ranking, true_int.probs, 10);
  }
  const double tau = binarize_threshold_scale / static_cast<double>(dim);
  int supported = 0;
  double f1_sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    const bool t = true_int.probs[static_cast<size_t>(i)] >= tau;
    const bool p = pred_int.probs[static_cast<size_t>(i)] >= tau;
    if (!t && !p) continue;
    ++supported;
    if (t && p) f1_sum += 1.0;  // single-instance per-cell F1 is 1 on agreement, else 0
  }
  if (supported == 0) return 1.0;
  return f1_sum / supported;
}

MetricsReport evaluate_run(const std::vector<Session>& sessions, const RunOutputs& outputs,
                           const BehaviorSet& behaviors, const EvalConfig& cfg) {
  std::vector<std::string> objectives = cfg.objectives;
  if (objectives.empty()) {
    objectives.push_back("all");
    for (const auto& b : behaviors.levels()) {
      if (b.level >= 1) objectives.push_back(b.name);
    }
  }
  std::vector<std::string> missing;
  for (const auto& s : sessions) {
    if (!outputs.rankings.count(s.record.session_id)) missing.push_back(s.record.session_id);
  }
  if (!missing.empty()) {
    std::string msg = "evaluate_run: missing rankings for sessions:";
    for (size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ... (" + std::to_string(missing.size()) + " total)";
    throw Error::validation(msg);
  }

  MetricsReport report;
  auto add_metric = [&](const std::string& name, double value) {
    auto& agg = report.metrics[name];
    agg.mean += value;
    agg.n_sessions += 1;
  };

  for (const auto& s : sessions) {
    const auto& ranking = outputs.rankings.at(s.record.session_id);
    for (const auto& obj : objectives) {
      auto rel = per_objective_relevance(s.gt, obj, behaviors, cfg.per_behavior_mode);
      for (int k : cfg.ks) {
        const std::string name = (obj == "all" ? "All" : obj) + "-NDCG@" + std::to_string(k);
        add_metric(name, ndcg_at_k(ranking, rel, k));
      }
    }
    auto it = outputs.predicted_intents.find(s.record.session_id);
    if (it != outputs.predicted_intents.end()) {
      add_metric("Intent-NDCG@10", intent_metrics(s.intent_gt, it->second, IntentMetricMode::ndcg10));
      add_metric("Intent-MacroF1", intent_metrics(s.intent_gt, it->second, IntentMetricMode::macro_f1));
      add_metric("Intent-KL", intent_kl(s.intent_gt, it->second));
    }
  }
  for (auto& [name, agg] : report.metrics) {
    if (agg.n_sessions > 0) agg.mean /= agg.n_sessions;
  }
  return report;
}

MetricsReport aggregate_seed_reports(const std::vector<MetricsReport>& reports) {
  MetricsReport out;
  if (reports.empty()) return out;
  for (const auto& rep : reports) {
    for (const auto& [name, agg] : rep.metrics) {
      auto& target = out.metrics[name];
      target.per_seed.push_back(agg.mean);
      target.n_sessions = agg.n_sessions;
    }
  }
  for (auto& [name, agg] : out.metrics) {
    const double n = static_cast<double>(agg.per_seed.size());
    double mean = 0.0;
    for (double v : agg.per_seed) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : agg.per_seed) var += (v - mean) * (v - mean);
    agg.mean = mean;
    agg.stddev = n > 1 ? std::sqrt(var / n) : 0.0;
  }
  return out;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::json j;
  for (const auto& [name, agg] : report.metrics) {
    j[name] = {{"mean", agg.mean},
               {"std", agg.stddev},
               {"n_sessions", agg.n_sessions},
               {"per_seed", agg.per_seed}};
  }
  return j.dump(2);
}

void write_metrics_json(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error::runtime("cannot write metrics to " + path);
  out << metrics_to_json(report) << "\n";
}

}  // namespace intel
