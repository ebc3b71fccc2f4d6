#include "intel/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "intel/losses.hpp"
#include "intel/rng.hpp"

namespace intel {

namespace {

constexpr double kIdentityTol = 1e-9;
constexpr double kInequalityTol = 1e-7;

double bpr_pointwise(double z) { return softplus(-z); }
double bpr_first_derivative(double z) { return -(1.0 - sigmoid(z)); }
double bpr_second_derivative(double z) {
  double s = sigmoid(z);
  return s * (1.0 - s);
}

EnsembleScores ensemble_of(const VerifierInstance& inst) {
  EnsembleScores out;
  out.values.resize(static_cast<size_t>(inst.n_items), 0.0);
  for (int i = 0; i < inst.n_items; ++i) {
    double acc = 0.0;
    for (int c = 0; c < inst.k_models; ++c) {
      acc += inst.weights.values[static_cast<size_t>(i)][static_cast<size_t>(c)] *
             inst.scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
    }
    out.values[static_cast<size_t>(i)] = acc;
  }
  return out;
}

}  // namespace

double bpr_taylor_remainder(double z_ens, double z_k) {
  return bpr_pointwise(z_k) - bpr_pointwise(z_ens) - bpr_first_derivative(z_ens) * (z_k - z_ens);
}

std::pair<double, double> bpr_find_theta(double z_ens, double z_k) {
  const double target = bpr_taylor_remainder(z_ens, z_k);
  const double dz = z_k - z_ens;
  auto h = [&](double theta) {
    return 0.5 * bpr_second_derivative(z_ens + theta * dz) * dz * dz - target;
  };
  if (dz == 0.0) return {0.0, h(0.0)};
  const int grid = 2048;
  double prev_theta = 0.0, prev_val = h(0.0);
  double best_theta = 0.0, best_abs = std::abs(prev_val);
  for (int g = 1; g <= grid; ++g) {
    double theta = static_cast<double>(g) / grid;
    double val = h(theta);
    if (std::abs(val) < best_abs) {
      best_abs = std::abs(val);
      best_theta = theta;
    }
    if ((prev_val <= 0.0 && val >= 0.0) || (prev_val >= 0.0 && val <= 0.0)) {
      double lo = prev_theta, hi = theta, flo = prev_val;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = h(mid);
        if ((flo <= 0.0 && fm <= 0.0) || (flo >= 0.0 && fm >= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      double theta_star = 0.5 * (lo + hi);
      return {theta_star, h(theta_star)};
    }
    prev_theta = theta;
    prev_val = val;
  }
  return {best_theta, best_abs};
}

namespace {

// g(v) = log(1 + sum exp(-v_m)) and its quadratic form 1/2 d^T H(v) d with
// H = diag(q) - q q^T, q_m = exp(-v_m) / (1 + sum exp(-v)).
double g_tail(const std::vector<double>& v) {
  double acc = 1.0;
  for (double x : v) acc += std::exp(-x);
  return std::log(acc);
}

double g_quadratic_form(const std::vector<double>& v, const std::vector<double>& d) {
  double denom = 1.0;
  for (double x : v) denom += std::exp(-x);
  double sum_qd2 = 0.0, sum_qd = 0.0;
  for (size_t m = 0; m < v.size(); ++m) {
    double q = std::exp(-v[m]) / denom;
    sum_qd2 += q * d[m] * d[m];
    sum_qd += q * d[m];
  }
  return 0.5 * (sum_qd2 - sum_qd * sum_qd);
}

}  // namespace

double pl_taylor_remainder(const std::vector<double>& z_ens_tail,
                           const std::vector<double>& z_k_tail) {
  double denom = 1.0;
  for (double x : z_ens_tail) denom += std::exp(-x);
  double linear = 0.0;
  for (size_t m = 0; m < z_ens_tail.size(); ++m) {
    double q = std::exp(-z_ens_tail[m]) / denom;  // -dg/dv_m = q_m
    linear += -q * (z_k_tail[m] - z_ens_tail[m]);
  }
  return g_tail(z_k_tail) - g_tail(z_ens_tail) - linear;
}

std::pair<double, double> pl_find_theta(const std::vector<double>& z_ens_tail,
                                        const std::vector<double>& z_k_tail) {
  const double target = pl_taylor_remainder(z_ens_tail, z_k_tail);
  std::vector<double> d(z_ens_tail.size());
  bool all_zero = true;
  for (size_t m = 0; m < d.size(); ++m) {
    d[m] = z_k_tail[m] - z_ens_tail[m];
    if (d[m] != 0.0) all_zero = false;
  }
  auto h = [&](double theta) {
    std::vector<double> v(z_ens_tail.size());
    for (size_t m = 0; m < v.size(); ++m) v[m] = z_ens_tail[m] + theta * d[m];
    return g_quadratic_form(v, d) - target;
  };
  if (all_zero) return {0.0, h(0.0)};
  const int grid = 2048;
  double prev_theta = 0.0, prev_val = h(0.0);
  double best_theta = 0.0, best_abs = std::abs(prev_val);
  for (int g = 1; g <= grid; ++g) {
    double theta = static_cast<double>(g) / grid;
    double val = h(theta);
    if (std::abs(val) < best_abs) {
      best_abs = std::abs(val);
      best_theta = theta;
    }
    if ((prev_val <= 0.0 && val >= 0.0) || (prev_val >= 0.0 && val <= 0.0)) {
      double lo = prev_theta, hi = theta, flo = prev_val;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = h(mid);
        if ((flo <= 0.0 && fm <= 0.0) || (flo >= 0.0 && fm >= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      double theta_star = 0.5 * (lo + hi);
      return {theta_star, h(theta_star)};
    }
    prev_theta = theta;
    prev_val = val;
  }
  return {best_theta, best_abs};
}

VerificationResult verify_pointwise(const VerifierInstance& inst) {
  if (!inst.weights.rows_on_simplex()) {
    throw Error::validation("PreconditionViolated: weight rows must lie on the simplex");
  }
  const auto ens = ensemble_of(inst);
  VerificationResult res;
  long double lhs_total = 0.0L, basic_total = 0.0L, amb_total = 0.0L;
  for (int i = 0; i < inst.n_items; ++i) {
    const long double pi_n = static_cast<long double>(inst.gt.levels[static_cast<size_t>(i)]);
    const long double se = ens.values[static_cast<size_t>(i)];
    long double lhs = (se - pi_n) * (se - pi_n);
    long double basic = 0.0L, amb = 0.0L;
    for (int c = 0; c < inst.k_models; ++c) {
      long double w = inst.weights.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
      long double sk = inst.scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
      basic += w * (sk - pi_n) * (sk - pi_n);
      amb += w * (sk - se) * (sk - se);
    }
    double residual = static_cast<double>(lhs - (basic - amb));
    res.max_abs_residual = std::max(res.max_abs_residual, std::abs(residual));
    lhs_total += lhs;
    basic_total += basic;
    amb_total += amb;
  }
  res.lhs = static_cast<double>(lhs_total);
  res.weighted_basic_loss = static_cast<double>(basic_total);
  res.weighted_ambiguity = static_cast<double>(amb_total);
  res.correction_term = 0.0;
  res.rhs = static_cast<double>(basic_total - amb_total);
  res.slack = res.rhs - res.lhs;
  res.holds = res.max_abs_residual <= kIdentityTol;
  return res;
}

VerificationResult verify_pairwise(const VerifierInstance& inst) {
  if (!inst.weights.rows_on_simplex()) {
    throw Error::validation("PreconditionViolated: weight rows must lie on the simplex");
  }
  for (const auto& row : inst.scores.values) {
    for (double s : row) {
      if (s < 0.0) {
        throw Error::validation("PreconditionViolated: pairwise bound requires scores >= 0");
      }
    }
  }
  const auto ens = ensemble_of(inst);
  VerificationResult res;
  res.slack = std::numeric_limits<double>::infinity();
  double basic_acc = 0.0, corr_acc = 0.0, amb_acc = 0.0, lhs_acc = 0.0;
  int pair_count = 0;
  for (int n = 0; n < inst.n_items; ++n) {
    for (int m = 0; m < inst.n_items; ++m) {
      if (m == n) continue;
      const double z_ens = ens.values[static_cast<size_t>(n)] - ens.values[static_cast<size_t>(m)];
      const double lhs = bpr_pointwise(z_ens);
      double basic = 0.0, amb = 0.0, correction = 0.0;
      for (int c = 0; c < inst.k_models; ++c) {
        const double w = inst.weights.values[static_cast<size_t>(n)][static_cast<size_t>(c)];
        const double z_k = inst.scores.values[static_cast<size_t>(n)][static_cast<size_t>(c)] -
                           inst.scores.values[static_cast<size_t>(m)][static_cast<size_t>(c)];
        basic += w * bpr_pointwise(z_k);
        amb += w * bpr_taylor_remainder(z_ens, z_k);
        correction += inst.scores.values[static_cast<size_t>(m)][static_cast<size_t>(c)];
      }
      correction *= inst.delta;
      const double rhs = basic + correction - amb;
      const double slack = rhs - lhs;
      if (slack < res.slack) {
        res.slack = slack;
        res.lhs = lhs;
        res.rhs = rhs;
      }
      basic_acc += basic;
      corr_acc += correction;
      amb_acc += amb;
      lhs_acc += lhs;
      ++pair_count;
    }
  }
  if (pair_count == 0) {
    res.slack = 0.0;
    res.holds = true;
    return res;
  }
  res.weighted_basic_loss = basic_acc / pair_count;
  res.correction_term = corr_acc / pair_count;
  res.weighted_ambiguity = amb_acc / pair_count;
  res.holds = res.slack >= -kInequalityTol;
  return res;
}

VerificationResult verify_listwise(const VerifierInstance& inst) {
  if (!inst.weights.rows_on_simplex()) {
    throw Error::validation("PreconditionViolated: weight rows must lie on the simplex");
  }
  for (const auto& row : inst.scores.values) {
    for (double s : row) {
      if (s < 0.0) {
        throw Error::validation("PreconditionViolated: listwise bound requires scores >= 0");
      }
    }
  }
  const auto ens = ensemble_of(inst);
  const auto& pi = inst.gt.pi_order;
  const int n_items = inst.n_items;
  VerificationResult res;

  EnsembleScores ens_scores{ens.values};
  const double lhs = pl_loss(inst.gt, ens_scores);

  // sum_k w_max^k l_pl(S^k)
  double basic = 0.0;
  for (int c = 0; c < inst.k_models; ++c) {
    double w_max = 0.0;
    for (int i = 0; i < n_items; ++i) {
      w_max = std::max(w_max, inst.weights.values[static_cast<size_t>(i)][static_cast<size_t>(c)]);
    }
    EnsembleScores column;
    column.values.resize(static_cast<size_t>(n_items));
    for (int i = 0; i < n_items; ++i) {
      column.values[static_cast<size_t>(i)] =
          inst.scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
    }
    basic += w_max * pl_loss(inst.gt, column);
  }

  // delta * N * max_m sum_k S_m^k
  double s_sum_max = 0.0;
  for (int i = 0; i < n_items; ++i) {
    double row_sum = 0.0;
    for (int c = 0; c < inst.k_models; ++c) {
      row_sum += inst.scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
    }
    s_sum_max = std::max(s_sum_max, row_sum);
  }
  const double correction = inst.delta * n_items * s_sum_max;

  // Positionwise exact remainders.
  double amb = 0.0;
  for (int pos = 0; pos + 1 < n_items; ++pos) {
    const size_t head = static_cast<size_t>(pi[static_cast<size_t>(pos)]);
    std::vector<double> ens_tail(static_cast<size_t>(n_items - pos - 1));
    for (int t = pos + 1; t < n_items; ++t) {
      const size_t tail = static_cast<size_t>(pi[static_cast<size_t>(t)]);
      ens_tail[static_cast<size_t>(t - pos - 1)] = ens.values[head] - ens.values[tail];
    }
    for (int c = 0; c < inst.k_models; ++c) {
      std::vector<double> k_tail(static_cast<size_t>(n_items - pos - 1));
      for (int t = pos + 1; t < n_items; ++t) {
        const size_t tail = static_cast<size_t>(pi[static_cast<size_t>(t)]);
        k_tail[static_cast<size_t>(t - pos - 1)] =
            inst.scores.values[head][static_cast<size_t>(c)] -
            inst.scores.values[tail][static_cast<size_t>(c)];
      }
      amb += inst.weights.values[head][static_cast<size_t>(c)] *
             pl_taylor_remainder(ens_tail, k_tail);
    }
  }

  res.lhs = lhs;
  res.weighted_basic_loss = basic;
  res.correction_term = correction;
  res.weighted_ambiguity = amb;
  res.rhs = basic + correction - amb;
  res.slack = res.rhs - res.lhs;
  res.holds = res.slack >= -kInequalityTol;
  return res;
}

VerifierInstance random_instance(uint64_t seed, int k_models, int n_items, double delta_cap,
                                 int num_levels) {
  if (k_models < 1) throw Error::validation("random_instance: K must be >= 1");
  if (n_items < 2) throw Error::validation("random_instance: N must be >= 2");
  if (delta_cap < 0.0 || delta_cap > 1.0) {
    throw Error::validation("random_instance: delta_cap must be in [0,1]");
  }
  Rng rng(seed);
  VerifierInstance inst;
  inst.seed = seed;
  inst.k_models = k_models;
  inst.n_items = n_items;
  inst.scores.model_ids.resize(static_cast<size_t>(k_models));
  for (int c = 0; c < k_models; ++c) inst.scores.model_ids[static_cast<size_t>(c)] = "m" + std::to_string(c);
  inst.scores.values.assign(static_cast<size_t>(n_items),
                            std::vector<double>(static_cast<size_t>(k_models), 0.0));
  inst.scores.mask.assign(static_cast<size_t>(n_items),
                          std::vector<uint8_t>(static_cast<size_t>(k_models), 1));
  for (auto& row : inst.scores.values) {
    for (auto& v : row) v = rng.uniform();
  }
  inst.weights.values.resize(static_cast<size_t>(n_items));
  for (auto& row : inst.weights.values) row = rng.dirichlet(k_models);

  // Shrink rows toward the column mean until the spread fits under the cap.
  double spread = inst.weights.spread();
  if (spread > delta_cap && n_items > 0) {
    std::vector<double> mean(static_cast<size_t>(k_models), 0.0);
    for (const auto& row : inst.weights.values) {
      for (int c = 0; c < k_models; ++c) mean[static_cast<size_t>(c)] += row[static_cast<size_t>(c)];
    }
    for (auto& v : mean) v /= n_items;
    const double lambda = spread > 0.0 ? delta_cap / spread : 0.0;
    for (auto& row : inst.weights.values) {
      for (int c = 0; c < k_models; ++c) {
        row[static_cast<size_t>(c)] =
            mean[static_cast<size_t>(c)] + lambda * (row[static_cast<size_t>(c)] - mean[static_cast<size_t>(c)]);
      }
    }
  }
  inst.delta = inst.weights.spread();

  inst.gt.levels.resize(static_cast<size_t>(n_items));
  std::vector<std::string> ids(static_cast<size_t>(n_items));
  for (int i = 0; i < n_items; ++i) {
    inst.gt.levels[static_cast<size_t>(i)] = rng.uniform_int(num_levels);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%04d", i);
    ids[static_cast<size_t>(i)] = buf;
  }
  inst.gt.pi_order = derive_pi_order(inst.gt.levels, ids);
  return inst;
}

VerifierRunReport run_verifier(const VerifierRunConfig& cfg) {
  VerifierRunReport report;
  report.config = cfg;
  report.min_slack_pairwise = std::numeric_limits<double>::infinity();
  report.min_slack_listwise = std::numeric_limits<double>::infinity();
  const int k_choices[] = {2, 3, 5};
  double sum_pair = 0.0, sum_list = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    uint64_t trial_seed = derive_seed(cfg.seed, static_cast<uint64_t>(t));
    Rng pick(trial_seed);
    int k = cfg.k_models > 0 ? cfg.k_models : k_choices[pick.uniform_int(3)];
    int n = cfg.n_items > 0 ? cfg.n_items : 2 + pick.uniform_int(49);
    auto inst = random_instance(derive_seed(trial_seed, 1), k, n, cfg.delta_cap, cfg.num_levels);
    TrialReport trial;
    trial.seed = trial_seed;
    trial.pointwise = verify_pointwise(inst);
    trial.pairwise = verify_pairwise(inst);
    trial.listwise = verify_listwise(inst);
    if (trial.all_hold()) {
      ++report.pass_count;
    } else if (!cfg.counterexample_dir.empty()) {
      std::filesystem::create_directories(cfg.counterexample_dir);
      std::string path = cfg.counterexample_dir + "/counterexample_" + std::to_string(trial_seed) + ".json";
      std::ofstream out(path);
      out << instance_to_json(inst);
      report.counterexample_paths.push_back(path);
    }
    report.min_slack_pairwise = std::min(report.min_slack_pairwise, trial.pairwise.slack);
    report.min_slack_listwise = std::min(report.min_slack_listwise, trial.listwise.slack);
    report.max_pointwise_residual =
        std::max(report.max_pointwise_residual, trial.pointwise.max_abs_residual);
    sum_pair += trial.pairwise.slack;
    sum_list += trial.listwise.slack;
    report.trials.push_back(std::move(trial));
  }
  if (cfg.trials > 0) {
    report.mean_slack_pairwise = sum_pair / cfg.trials;
    report.mean_slack_listwise = sum_list / cfg.trials;
  }
  return report;
}

namespace {

nlohmann::json result_to_json(const VerificationResult& r) {
  return {{"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.slack},
          {"holds", r.holds},
          {"max_abs_residual", r.max_abs_residual},
          {"weighted_basic_loss", r.weighted_basic_loss},
          {"correction_term", r.correction_term},
          {"weighted_ambiguity", r.weighted_ambiguity}};
}

}  // namespace

std::string instance_to_json(const VerifierInstance& inst) {
  nlohmann::json j;
  j["seed"] = inst.seed;
  j["k_models"] = inst.k_models;
  j["n_items"] = inst.n_items;
  j["scores"] = inst.scores.values;
  j["weights"] = inst.weights.values;
  j["delta"] = inst.delta;
  j["levels"] = inst.gt.levels;
  j["pi_order"] = inst.gt.pi_order;
  return j.dump(2);
}

void write_verifier_report(const VerifierRunReport& report, const std::string& path) {
  nlohmann::json j;
  j["config"] = {{"trials", report.config.trials},
                 {"k", report.config.k_models},
                 {"n", report.config.n_items},
                 {"delta_cap", report.config.delta_cap},
                 {"seed", report.config.seed},
                 {"num_levels", report.config.num_levels}};
  j["pass_count"] = report.pass_count;
  j["trial_count"] = report.trials.size();
  j["min_slack_pairwise"] = report.min_slack_pairwise;
  j["min_slack_listwise"] = report.min_slack_listwise;
  j["mean_slack_pairwise"] = report.mean_slack_pairwise;
  j["mean_slack_listwise"] = report.mean_slack_listwise;
  j["max_pointwise_residual"] = report.max_pointwise_residual;
  j["counterexamples"] = report.counterexample_paths;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"seed", t.seed},
                      {"pointwise", result_to_json(t.pointwise)},
                      {"pairwise", result_to_json(t.pairwise)},
                      {"listwise", result_to_json(t.listwise)}});
  }
  j["trials"] = std::move(trials);
  std::ofstream out(path);
  if (!out) throw Error::runtime("cannot write verifier report to " + path);
  out << j.dump(2) << "\n";
}

}  // namespace intel
