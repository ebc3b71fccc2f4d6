#include "intel/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "intel/baselines.hpp"
#include "intel/evaluation.hpp"
#include "intel/losses.hpp"

namespace intel {

namespace {

struct UserState {
  std::vector<std::vector<double>> cat_pref;  // per behavior_index, over categories
  double buy_logit = 0.0;
};

std::string item_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "i%06d", i);
  return buf;
}

std::string user_name(int u) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%05d", u);
  return buf;
}

}  // namespace

SyntheticOutput generate_synthetic(const RunConfig& cfg) {
  const SyntheticConfig& sc = cfg.synthetic;
  const BehaviorSet behaviors = BehaviorSet::two_level();  // Examine < Click < Buy
  const int n_behaviors = behaviors.num_positive();        // 2
  const int n_cats = sc.n_categories;
  const int pool_size = std::min(sc.n_items, std::max(200, 40 * sc.top_m));

  // Item catalog: category plus one latent quality per behavior.
  Rng item_rng(derive_seed(sc.seed, 0xA11CE));
  std::vector<int> item_category(static_cast<size_t>(sc.n_items));
  std::vector<std::vector<double>> item_quality(
      static_cast<size_t>(sc.n_items), std::vector<double>(static_cast<size_t>(n_behaviors)));
  for (int i = 0; i < sc.n_items; ++i) {
    item_category[static_cast<size_t>(i)] = item_rng.uniform_int(n_cats);
    for (int b = 0; b < n_behaviors; ++b) {
      item_quality[static_cast<size_t>(i)][static_cast<size_t>(b)] = item_rng.normal();
    }
  }

  // Session-context buckets shift the click/buy balance; the hour is visible
  // to the model, the boost is not.
  const double ctx_boost[3] = {-sc.context_effect, 0.0, sc.context_effect};
  const int bucket_hour[3] = {9, 14, 20};

  const double kCatGain = 2.2;   // how strongly category intent drives utility
  const double kQualGain = 1.0;
  const double kClickBias = -1.4;
  const double kBuyBias = -1.8;

  SyntheticOutput out;
  std::map<std::string, std::map<std::string, SyntheticItemTruth>> truth;

  for (int u = 0; u < sc.n_users; ++u) {
    Rng rng(derive_seed(sc.seed, 0xB0B0 + static_cast<uint64_t>(u)));
    UserState state;
    state.cat_pref.resize(static_cast<size_t>(n_behaviors));
    for (int b = 0; b < n_behaviors; ++b) {
      state.cat_pref[static_cast<size_t>(b)] = rng.dirichlet(n_cats, sc.intent_concentration);
    }
    state.buy_logit = rng.normal(0.0, 1.0);

    // Distinct session days, ascending.
    std::set<int> days;
    while (static_cast<int>(days.size()) < std::min(sc.sessions_per_user, sc.days)) {
      days.insert(rng.uniform_int(sc.days));
    }

    for (int day : days) {
      // Latent intent drift between sessions.
      for (int b = 0; b < n_behaviors; ++b) {
        auto fresh = rng.dirichlet(n_cats, sc.intent_concentration);
        auto& pref = state.cat_pref[static_cast<size_t>(b)];
        double total = 0.0;
        for (int c = 0; c < n_cats; ++c) {
          pref[static_cast<size_t>(c)] =
              (1.0 - sc.intent_drift) * pref[static_cast<size_t>(c)] +
              sc.intent_drift * fresh[static_cast<size_t>(c)];
          total += pref[static_cast<size_t>(c)];
        }
        for (auto& p : pref) p /= total;
      }

      const int bucket = rng.uniform_int(3);
      const int hour = bucket_hour[bucket] + rng.uniform_int(3) - 1;
      const int64_t ts = static_cast<int64_t>(day) * 86400 + static_cast<int64_t>(hour) * 3600 +
                         rng.uniform_int(3600);
      const double mix_buy = sigmoid(state.buy_logit + ctx_boost[bucket]);
      const double mix_click = sigmoid(-0.35 * (state.buy_logit + ctx_boost[bucket]) + 0.8);

      // Retrieval pool for this session.
      std::vector<int> pool(static_cast<size_t>(pool_size));
      for (int p = 0; p < pool_size; ++p) pool[static_cast<size_t>(p)] = rng.uniform_int(sc.n_items);
      std::sort(pool.begin(), pool.end());
      pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

      auto utility = [&](int item, int b) {
        return kCatGain * n_cats *
                   state.cat_pref[static_cast<size_t>(b)][static_cast<size_t>(
                       item_category[static_cast<size_t>(item)])] +
               kQualGain * item_quality[static_cast<size_t>(item)][static_cast<size_t>(b)];
      };

      // Behavior-specialized scorers over the pool.
      std::vector<std::vector<std::pair<std::string, double>>> lists(
          static_cast<size_t>(sc.k_models));
      std::set<int> union_items;
      for (int k = 0; k < sc.k_models; ++k) {
        const int b = k % n_behaviors;
        std::vector<std::pair<double, int>> scored;
        scored.reserve(pool.size());
        for (int item : pool) {
          double s = utility(item, b) + sc.score_noise * rng.normal();
          scored.emplace_back(s, item);
        }
        const size_t keep = std::min<size_t>(static_cast<size_t>(sc.top_m), scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep), scored.end(),
                          [](const auto& a, const auto& b2) {
                            if (a.first != b2.first) return a.first > b2.first;
                            return a.second < b2.second;
                          });
        for (size_t pos = 0; pos < keep; ++pos) {
          lists[static_cast<size_t>(k)].emplace_back(item_name(scored[pos].second),
                                                     scored[pos].first);
          union_items.insert(scored[pos].second);
        }
      }

      // Displayed candidates = union of the K lists; plus occasional organic
      // positives discovered outside every list.
      std::vector<int> displayed(union_items.begin(), union_items.end());
      std::vector<std::pair<int, int>> interactions;  // (item, level)
      double best_gain = -1.0;
      std::pair<int, int> best_forced{-1, 0};
      for (int item : displayed) {
        const double u_click = utility(item, 0);
        const double u_buy = n_behaviors > 1 ? utility(item, 1) : u_click;
        const double p_click = mix_click * sigmoid(u_click + kClickBias);
        const double p_buy =
            n_behaviors > 1 ? mix_buy * sigmoid(u_buy + kBuyBias) : 0.0;
        int level = 0;
        if (rng.uniform() < p_buy) {
          level = 2;
        } else if (rng.uniform() < p_click) {
          level = 1;
        }
        if (level > 0) interactions.emplace_back(item, level);
        const double expected_gain = 3.0 * p_buy + 1.0 * p_click;
        if (expected_gain > best_gain) {
          best_gain = expected_gain;
          best_forced = {item, p_buy * 3.0 >= p_click ? 2 : 1};
        }
      }
      if (interactions.empty() && best_forced.first >= 0) {
        interactions.push_back(best_forced);  // keep every session positive
      }
      // Organic positives outside the displayed lists.
      if (rng.uniform() < 0.25 && !pool.empty()) {
        for (int attempt = 0; attempt < 8; ++attempt) {
          int item = pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
          if (union_items.count(item)) continue;
          const double u_buy = n_behaviors > 1 ? utility(item, 1) : utility(item, 0);
          if (rng.uniform() < 0.6 * mix_buy * sigmoid(u_buy + kBuyBias)) {
            interactions.emplace_back(item, 2);
          }
          break;
        }
      }

      // Emit events: one examine per displayed item, then positives.
      const std::string uid = user_name(u);
      for (int item : displayed) {
        out.events.push_back({uid, item_name(item), item_category[static_cast<size_t>(item)], 0,
                              ts, std::nullopt});
      }
      std::map<int, int> level_of;
      for (auto& [item, level] : interactions) {
        level_of[item] = std::max(level_of[item], level);
      }
      for (auto& [item, level] : level_of) {
        out.events.push_back({uid, item_name(item), item_category[static_cast<size_t>(item)],
                              level, ts + 60, std::nullopt});
      }

      const std::string session_id = uid + ":d" + std::to_string(ts / 86400);
      for (int k = 0; k < sc.k_models; ++k) {
        BasicList bl;
        bl.items = lists[static_cast<size_t>(k)];
        out.basic_lists.by_session[session_id]["scorer_" + behaviors.at((k % n_behaviors) + 1).name +
                                               "_" + std::to_string(k)] = std::move(bl);
      }

      // Truth for every item that can become a candidate.
      auto& session_truth = truth[session_id];
      auto record_truth = [&](int item) {
        SyntheticItemTruth t;
        const double u_click = utility(item, 0);
        const double u_buy = n_behaviors > 1 ? utility(item, 1) : u_click;
        t.utility_per_behavior[0] = u_click;
        if (n_behaviors > 1) t.utility_per_behavior[1] = u_buy;
        const double eg_click = mix_click * sigmoid(u_click + kClickBias) * 1.0;
        const double eg_buy =
            n_behaviors > 1 ? mix_buy * sigmoid(u_buy + kBuyBias) * 3.0 : 0.0;
        t.driving_behavior = eg_buy > eg_click ? 1 : 0;
        session_truth[item_name(item)] = t;
      };
      for (int item : displayed) record_truth(item);
      for (auto& [item, level] : level_of) record_truth(item);
    }
  }

  std::set<std::string> model_names;
  for (const auto& [sid, models] : out.basic_lists.by_session) {
    for (const auto& [mid, _] : models) model_names.insert(mid);
  }
  out.basic_lists.model_ids.assign(model_names.begin(), model_names.end());

  // Run the regular pipeline over the generated raw data.
  std::map<std::string, int> catalog;
  for (const auto& ev : out.events) catalog[ev.item_id] = ev.category_id;
  auto filtered = filter_min_positive(out.events, cfg.dataset.min_positive);
  auto records = build_sessions(std::move(filtered), "day");
  std::vector<Session> sessions;
  sessions.reserve(records.size());
  for (const auto& rec : records) {
    if (!out.basic_lists.by_session.count(rec.session_id)) continue;  // fully filtered session
    Session s = assemble_candidates(rec, out.basic_lists, catalog, behaviors, n_cats, sc.top_m);
    normalize_and_impute(s.scores);
    sessions.push_back(std::move(s));
  }
  out.dataset = SessionDataset(std::move(sessions));
  out.truth = std::move(truth);

  // Oracle sanity check on the test split: per-item one-hot weights on the
  // scorer matching the driving behavior must beat every single scorer.
  const auto split = temporal_split(out.dataset.sessions());
  const int k_models = static_cast<int>(out.basic_lists.model_ids.size());
  std::vector<double> single_sum(static_cast<size_t>(k_models), 0.0);
  double oracle_sum = 0.0, borda_sum = 0.0;
  int count = 0;
  for (int idx : split.test) {
    const Session& s = out.dataset.sessions()[static_cast<size_t>(idx)];
    std::vector<std::string> ids;
    for (const auto& c : s.record.candidates) ids.push_back(c.item_id);
    auto rel = per_objective_relevance(s.gt, "all", behaviors);
    const auto& session_truth = out.truth.at(s.record.session_id);

    std::vector<double> oracle_scores(ids.size(), 0.0);
    for (size_t i = 0; i < ids.size(); ++i) {
      auto t = session_truth.find(ids[i]);
      const int driving = t == session_truth.end() ? 0 : t->second.driving_behavior;
      // Pick the first scorer specialized in the driving behavior.
      int pick = 0;
      for (int k = 0; k < k_models; ++k) {
        if (k % behaviors.num_positive() == driving) {
          pick = k;
          break;
        }
      }
      oracle_scores[i] = s.scores.values[i][static_cast<size_t>(pick)];
    }
    oracle_sum += ndcg_at_k(ranking_from_scores(oracle_scores, ids), rel, 3);
    for (int k = 0; k < k_models; ++k) {
      single_sum[static_cast<size_t>(k)] += ndcg_at_k(single_model(s.scores, k, ids), rel, 3);
    }
    borda_sum += ndcg_at_k(borda(per_model_rankings(s.scores, ids),
                                 static_cast<int>(ids.size()), ids),
                           rel, 3);
    ++count;
  }
  if (count == 0) throw Error::runtime("generate_synthetic: empty test split");
  out.oracle_ndcg3 = oracle_sum / count;
  out.borda_ndcg3 = borda_sum / count;
  for (int k = 0; k < k_models; ++k) {
    out.single_ndcg3.push_back(single_sum[static_cast<size_t>(k)] / count);
    if (out.oracle_ndcg3 <= out.single_ndcg3.back()) {
      throw Error::runtime(
          "generate_synthetic: oracle per-item weights do not beat single scorer " +
          out.basic_lists.model_ids[static_cast<size_t>(k)] + " (" +
          std::to_string(out.oracle_ndcg3) + " vs " + std::to_string(out.single_ndcg3.back()) +
          "); the configuration is too noisy to be ensemble-learnable");
    }
  }
  return out;
}

void write_synthetic(const SyntheticOutput& out, const std::string& out_dir,
                     const BehaviorSet& behaviors) {
  std::filesystem::create_directories(out_dir);
  write_interactions_csv(out_dir + "/interactions.csv", out.events, behaviors);
  write_basic_lists(out_dir + "/basic_lists.jsonl", out.basic_lists);
  write_sessions_jsonl(out_dir + "/sessions.jsonl", out.dataset.sessions());
}

}  // namespace intel
