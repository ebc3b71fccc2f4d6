#include "intel/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace intel {

namespace {

constexpr int64_t kSecondsPerDay = 86400;

int64_t day_of(int64_t ts) {
  // Floor division keeps pre-epoch timestamps on the correct day.
  return ts >= 0 ? ts / kSecondsPerDay : (ts - kSecondsPerDay + 1) / kSecondsPerDay;
}

ContextFeatures context_from_timestamp(int64_t ts) {
  ContextFeatures ctx;
  int64_t seconds_in_day = ts - day_of(ts) * kSecondsPerDay;
  ctx.hour_of_day = static_cast<int>(seconds_in_day / 3600);
  ctx.day_of_week = static_cast<int>(((day_of(ts) % 7) + 7 + 4) % 7);  // epoch day 0 = Thursday
  return ctx;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) fields.push_back(tok);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

std::vector<InteractionEvent> read_interactions_csv(const std::string& path,
                                                    const BehaviorSet& behaviors) {
  std::ifstream in(path);
  if (!in) throw Error::validation("cannot open interactions file " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error::validation("interactions file is empty: " + path);
  auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"user_id", "item_id", "category_id", "behavior",
                                             "timestamp"};
  if (header.size() < expected.size()) {
    throw Error::validation("interactions header must start with user_id,item_id,category_id,behavior,timestamp");
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      throw Error::validation("interactions header column " + std::to_string(i + 1) +
                              " must be '" + expected[i] + "', got '" + header[i] + "'");
    }
  }
  const bool has_visit = header.size() > 5 && header[5] == "visit_id";

  std::vector<InteractionEvent> events;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 5) {
      throw Error::validation("interactions row " + std::to_string(row) + ": expected 5 columns");
    }
    InteractionEvent ev;
    ev.user_id = fields[0];
    ev.item_id = fields[1];
    try {
      ev.category_id = std::stoi(fields[2]);
    } catch (const std::exception&) {
      throw Error::validation("interactions row " + std::to_string(row) + ": bad category_id '" +
                              fields[2] + "'");
    }
    ev.level = behaviors.level_of(fields[3]);
    try {
      size_t used = 0;
      ev.timestamp = std::stoll(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument(fields[4]);
    } catch (const std::exception&) {
      throw Error::validation("interactions row " + std::to_string(row) +
                              ": unparseable timestamp '" + fields[4] + "'");
    }
    if (has_visit && fields.size() > 5 && !fields[5].empty()) ev.visit_id = fields[5];
    events.push_back(std::move(ev));
  }
  return events;
}

void write_interactions_csv(const std::string& path, const std::vector<InteractionEvent>& events,
                            const BehaviorSet& behaviors, bool with_visit_id) {
  std::ofstream out(path);
  if (!out) throw Error::runtime("cannot write interactions to " + path);
  out << "user_id,item_id,category_id,behavior,timestamp";
  if (with_visit_id) out << ",visit_id";
  out << "\n";
  for (const auto& ev : events) {
    out << ev.user_id << ',' << ev.item_id << ',' << ev.category_id << ','
        << behaviors.at(ev.level).name << ',' << ev.timestamp;
    if (with_visit_id) out << ',' << ev.visit_id.value_or("");
    out << "\n";
  }
}

BasicListFile read_basic_lists(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::validation("cannot open basic lists file " + path);
  BasicListFile out;
  std::set<std::string> model_seen;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw Error::validation("basic lists line " + std::to_string(row) + ": " + e.what());
    }
    const std::string session_id = j.at("session_id").get<std::string>();
    const std::string model_id = j.at("model_id").get<std::string>();
    BasicList list;
    std::set<std::string> ids;
    for (const auto& item : j.at("items")) {
      std::string item_id = item.at("item_id").get<std::string>();
      double score = item.at("score").get<double>();
      if (!std::isfinite(score)) {
        throw Error::validation("basic lists line " + std::to_string(row) + ": non-finite score");
      }
      if (!ids.insert(item_id).second) {
        throw Error::validation("basic lists line " + std::to_string(row) + ": duplicate item '" +
                                item_id + "'");
      }
      list.items.emplace_back(std::move(item_id), score);
    }
    if (model_seen.insert(model_id).second) out.model_ids.push_back(model_id);
    out.by_session[session_id][model_id] = std::move(list);
  }
  std::sort(out.model_ids.begin(), out.model_ids.end());
  return out;
}

void write_basic_lists(const std::string& path, const BasicListFile& lists) {
  std::ofstream out(path);
  if (!out) throw Error::runtime("cannot write basic lists to " + path);
  for (const auto& [session_id, models] : lists.by_session) {
    for (const auto& [model_id, list] : models) {
      nlohmann::json items = nlohmann::json::array();
      for (const auto& [item_id, score] : list.items) {
        items.push_back({{"item_id", item_id}, {"score", score}});
      }
      nlohmann::json j{{"session_id", session_id}, {"model_id", model_id}, {"items", items}};
      out << j.dump() << "\n";
    }
  }
}

std::vector<InteractionEvent> filter_min_positive(std::vector<InteractionEvent> events,
                                                  int min_count) {
  if (min_count < 1) throw Error::validation("filter_min_positive: min_count must be >= 1");
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::string, int> user_pos, item_pos;
    for (const auto& ev : events) {
      if (ev.level >= 1) {
        ++user_pos[ev.user_id];
        ++item_pos[ev.item_id];
      }
    }
    std::vector<InteractionEvent> kept;
    kept.reserve(events.size());
    for (auto& ev : events) {
      if (user_pos[ev.user_id] >= min_count && item_pos[ev.item_id] >= min_count) {
        kept.push_back(std::move(ev));
      } else {
        changed = true;
      }
    }
    events = std::move(kept);
  }
  return events;
}

std::vector<SessionRecord> build_sessions(std::vector<InteractionEvent> events,
                                          const std::string& rule) {
  if (rule != "day" && rule != "visit") {
    throw Error::validation("build_sessions: unknown session rule '" + rule + "'");
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.timestamp < b.timestamp;
                   });
  std::map<std::string, std::vector<const InteractionEvent*>> groups;
  for (const auto& ev : events) {
    std::string key;
    if (rule == "day") {
      key = ev.user_id + ":d" + std::to_string(day_of(ev.timestamp));
    } else {
      if (!ev.visit_id) {
        throw Error::validation("build_sessions: visit rule requires a visit_id column");
      }
      key = ev.user_id + ":v" + *ev.visit_id;
    }
    groups[key].push_back(&ev);
  }
  std::vector<SessionRecord> sessions;
  for (auto& [key, evs] : groups) {
    bool has_positive = false;
    for (const auto* ev : evs) has_positive |= ev->level >= 1;
    if (!has_positive) continue;  // only retained with positive interactions
    SessionRecord rec;
    rec.session_id = key;
    rec.user_id = evs.front()->user_id;
    rec.timestamp = evs.front()->timestamp;
    for (const auto* ev : evs) rec.timestamp = std::min(rec.timestamp, ev->timestamp);
    rec.context = context_from_timestamp(rec.timestamp);
    std::map<std::string, int> item_level;
    std::map<std::string, int> item_cat;
    for (const auto* ev : evs) {
      auto it = item_level.find(ev->item_id);
      if (it == item_level.end()) {
        item_level[ev->item_id] = ev->level;
      } else {
        it->second = std::max(it->second, ev->level);
      }
      item_cat[ev->item_id] = ev->category_id;
    }
    for (const auto& [item_id, level] : item_level) {
      rec.interactions.emplace_back(item_id, level);
      rec.candidates.push_back({item_id, item_cat[item_id]});
    }
    sessions.push_back(std::move(rec));
  }
  std::sort(sessions.begin(), sessions.end(), [](const SessionRecord& a, const SessionRecord& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.session_id < b.session_id;
  });
  return sessions;
}

Session assemble_candidates(const SessionRecord& record, const BasicListFile& lists,
                            const std::map<std::string, int>& item_categories,
                            const BehaviorSet& behaviors, int n_categories, int top_m) {
  auto session_lists = lists.by_session.find(record.session_id);
  for (const auto& model_id : lists.model_ids) {
    if (session_lists == lists.by_session.end() || !session_lists->second.count(model_id)) {
      throw Error::validation("MissingBasicList: session " + record.session_id + " has no list from model " +
                              model_id);
    }
  }
  std::map<std::string, int> level_of;
  for (const auto& [item_id, level] : record.interactions) level_of[item_id] = level;

  // Union of top-m items per model plus every positive item, id-sorted.
  std::set<std::string> candidate_ids;
  for (const auto& model_id : lists.model_ids) {
    const auto& list = session_lists->second.at(model_id);
    const size_t limit = std::min<size_t>(list.items.size(), static_cast<size_t>(top_m));
    for (size_t i = 0; i < limit; ++i) candidate_ids.insert(list.items[i].first);
  }
  for (const auto& [item_id, level] : record.interactions) {
    if (level >= 1) candidate_ids.insert(item_id);
  }

  Session session;
  session.record = record;
  session.record.candidates.clear();
  std::map<std::string, int> index_of;
  for (const auto& item_id : candidate_ids) {
    CandidateItem item;
    item.item_id = item_id;
    auto cat = item_categories.find(item_id);
    if (cat == item_categories.end()) {
      throw Error::validation("assemble_candidates: item '" + item_id +
                              "' has no category in the catalog");
    }
    item.category_id = cat->second;
    if (item.category_id < 0 || item.category_id >= n_categories) {
      throw Error::validation("assemble_candidates: item '" + item_id + "' category " +
                              std::to_string(item.category_id) + " out of range [0," +
                              std::to_string(n_categories) + ")");
    }
    index_of[item_id] = static_cast<int>(session.record.candidates.size());
    session.record.candidates.push_back(std::move(item));
  }

  const int n = static_cast<int>(session.record.candidates.size());
  const int k = static_cast<int>(lists.model_ids.size());
  session.scores.model_ids = lists.model_ids;
  session.scores.values.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(k), 0.0));
  session.scores.mask.assign(static_cast<size_t>(n), std::vector<uint8_t>(static_cast<size_t>(k), 0));
  for (int c = 0; c < k; ++c) {
    const auto& list = session_lists->second.at(lists.model_ids[static_cast<size_t>(c)]);
    for (const auto& [item_id, score] : list.items) {
      auto it = index_of.find(item_id);
      if (it == index_of.end()) continue;  // beyond top_m and not positive
      session.scores.values[static_cast<size_t>(it->second)][static_cast<size_t>(c)] = score;
      session.scores.mask[static_cast<size_t>(it->second)][static_cast<size_t>(c)] = 1;
    }
  }

  session.gt.levels.assign(static_cast<size_t>(n), 0);
  std::vector<std::string> ids(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& item_id = session.record.candidates[static_cast<size_t>(i)].item_id;
    ids[static_cast<size_t>(i)] = item_id;
    auto it = level_of.find(item_id);
    if (it != level_of.end()) session.gt.levels[static_cast<size_t>(i)] = it->second;
  }
  session.gt.pi_order = derive_pi_order(session.gt.levels, ids);
  session.intent_gt = compute_intent_gt(record, behaviors, n_categories);
  return session;
}

void normalize_and_impute(ScoreMatrix& scores) {
  const int n = scores.num_items();
  const int k = scores.num_models();
  if (n == 0) throw Error::validation("normalize_and_impute: empty score matrix");
  for (int c = 0; c < k; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int masked = 0;
    for (int i = 0; i < n; ++i) {
      if (!scores.mask[static_cast<size_t>(i)][static_cast<size_t>(c)]) continue;
      ++masked;
      lo = std::min(lo, scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)]);
      hi = std::max(hi, scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)]);
    }
    if (masked == 0) {
      throw Error::validation("normalize_and_impute: column " + std::to_string(c) +
                              " has no proposed items");
    }
    const double range = hi - lo;
    for (int i = 0; i < n; ++i) {
      auto& v = scores.values[static_cast<size_t>(i)][static_cast<size_t>(c)];
      if (!scores.mask[static_cast<size_t>(i)][static_cast<size_t>(c)]) {
        v = 0.0;  // an unproposed item is least-preferred for this list
      } else if (range <= 0.0) {
        v = 0.5;
      } else {
        v = (v - lo) / range;
      }
    }
  }
}

IntentDistribution compute_intent_gt(const SessionRecord& record, const BehaviorSet& behaviors,
                                     int n_categories) {
  std::map<std::string, int> category_of;
  for (const auto& c : record.candidates) category_of[c.item_id] = c.category_id;
  IntentDistribution intent;
  intent.probs.assign(static_cast<size_t>(behaviors.num_positive() * n_categories), 0.0);
  int positives = 0;
  for (const auto& [item_id, level] : record.interactions) {
    if (level < 1) continue;
    auto cat = category_of.find(item_id);
    if (cat == category_of.end()) {
      throw Error::validation("compute_intent_gt: positive item '" + item_id +
                              "' missing from candidates");
    }
    const int cell = IntentDistribution::cell(level - 1, cat->second, n_categories);
    intent.probs[static_cast<size_t>(cell)] += 1.0;
    ++positives;
  }
  if (positives == 0) {
    throw Error::validation("NoPositives: session " + record.session_id +
                            " has no positive interactions");
  }
  for (auto& p : intent.probs) p /= static_cast<double>(positives);
  return intent;
}

SplitIndices temporal_split(const std::vector<Session>& sessions) {
  if (sessions.empty()) throw Error::validation("temporal_split: no sessions");
  int64_t min_day = std::numeric_limits<int64_t>::max();
  int64_t max_day = std::numeric_limits<int64_t>::min();
  for (const auto& s : sessions) {
    min_day = std::min(min_day, day_of(s.record.timestamp));
    max_day = std::max(max_day, day_of(s.record.timestamp));
  }
  const int64_t span = max_day - min_day + 1;
  if (span < 11) {
    throw Error::validation("InsufficientTimespan: need >= 11 days, have " + std::to_string(span));
  }
  const int64_t test_start = max_day - 6;  // last 7 days
  const int64_t val_start = test_start - 3;
  SplitIndices split;
  for (int i = 0; i < static_cast<int>(sessions.size()); ++i) {
    const int64_t d = day_of(sessions[static_cast<size_t>(i)].record.timestamp);
    if (d >= test_start) {
      split.test.push_back(i);
    } else if (d >= val_start) {
      split.validation.push_back(i);
    } else {
      split.train.push_back(i);
    }
  }
  if (split.validation.empty()) throw Error::validation("temporal_split: empty validation slice");
  if (split.train.empty()) throw Error::validation("temporal_split: empty training slice");
  return split;
}

SessionDataset::SessionDataset(std::vector<Session> sessions) : sessions_(std::move(sessions)) {
  std::sort(sessions_.begin(), sessions_.end(), [](const Session& a, const Session& b) {
    if (a.record.user_id != b.record.user_id) return a.record.user_id < b.record.user_id;
    if (a.record.timestamp != b.record.timestamp) return a.record.timestamp < b.record.timestamp;
    return a.record.session_id < b.record.session_id;
  });
  for (int i = 0; i < static_cast<int>(sessions_.size()); ++i) {
    by_user_[sessions_[static_cast<size_t>(i)].record.user_id].push_back(i);
  }
}

std::vector<int> SessionDataset::history_of(int idx, int window) const {
  const auto& mine = by_user_.at(sessions_[static_cast<size_t>(idx)].record.user_id);
  std::vector<int> out;
  for (int pos = 0; pos < static_cast<int>(mine.size()); ++pos) {
    if (mine[static_cast<size_t>(pos)] == idx) {
      const int start = std::max(0, pos - window);
      for (int p = start; p < pos; ++p) out.push_back(mine[static_cast<size_t>(p)]);
      return out;
    }
  }
  throw Error::runtime("history_of: session index not found for its user");
}

std::vector<std::pair<int, int>> SessionDataset::item_history_of(int idx, int window,
                                                                 int item_max) const {
  std::vector<std::pair<int, int>> out;
  for (int past : history_of(idx, window)) {
    const auto& rec = sessions_[static_cast<size_t>(past)].record;
    std::map<std::string, int> category_of;
    for (const auto& c : rec.candidates) category_of[c.item_id] = c.category_id;
    for (const auto& [item_id, level] : rec.interactions) {
      if (level < 1) continue;
      out.emplace_back(level - 1, category_of.count(item_id) ? category_of[item_id] : 0);
    }
  }
  if (static_cast<int>(out.size()) > item_max) {
    out.erase(out.begin(), out.end() - item_max);
  }
  return out;
}

void write_sessions_jsonl(const std::string& path, const std::vector<Session>& sessions) {
  std::ofstream out(path);
  if (!out) throw Error::runtime("cannot write sessions to " + path);
  for (const auto& s : sessions) {
    nlohmann::json j;
    j["session_id"] = s.record.session_id;
    j["user_id"] = s.record.user_id;
    j["timestamp"] = s.record.timestamp;
    j["context"] = {{"hour", s.record.context.hour_of_day},
                    {"dow", s.record.context.day_of_week},
                    {"extra", s.record.context.extra}};
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : s.record.candidates) {
      cands.push_back({{"item_id", c.item_id}, {"category_id", c.category_id}});
    }
    j["candidates"] = std::move(cands);
    nlohmann::json inter = nlohmann::json::array();
    for (const auto& [item_id, level] : s.record.interactions) {
      inter.push_back({item_id, level});
    }
    j["interactions"] = std::move(inter);
    j["model_ids"] = s.scores.model_ids;
    j["scores"] = s.scores.values;
    j["mask"] = s.scores.mask;
    j["levels"] = s.gt.levels;
    j["pi_order"] = s.gt.pi_order;
    j["intent_gt"] = s.intent_gt.probs;
    out << j.dump() << "\n";
  }
}

std::vector<Session> read_sessions_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::validation("cannot open sessions file " + path);
  std::vector<Session> sessions;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw Error::validation("sessions line " + std::to_string(row) + ": " + e.what());
    }
    Session s;
    s.record.session_id = j.at("session_id").get<std::string>();
    s.record.user_id = j.at("user_id").get<std::string>();
    s.record.timestamp = j.at("timestamp").get<int64_t>();
    s.record.context.hour_of_day = j.at("context").at("hour").get<int>();
    s.record.context.day_of_week = j.at("context").at("dow").get<int>();
    s.record.context.extra = j.at("context").at("extra").get<std::vector<double>>();
    for (const auto& c : j.at("candidates")) {
      s.record.candidates.push_back(
          {c.at("item_id").get<std::string>(), c.at("category_id").get<int>()});
    }
    for (const auto& it : j.at("interactions")) {
      s.record.interactions.emplace_back(it.at(0).get<std::string>(), it.at(1).get<int>());
    }
    s.scores.model_ids = j.at("model_ids").get<std::vector<std::string>>();
    s.scores.values = j.at("scores").get<std::vector<std::vector<double>>>();
    s.scores.mask = j.at("mask").get<std::vector<std::vector<uint8_t>>>();
    s.gt.levels = j.at("levels").get<std::vector<int>>();
    s.gt.pi_order = j.at("pi_order").get<std::vector<int>>();
    s.intent_gt.probs = j.at("intent_gt").get<std::vector<double>>();
    sessions.push_back(std::move(s));
  }
  return sessions;
}

SessionDataset ingest(const std::string& interactions_csv, const std::string& basic_lists_jsonl,
                      const RunConfig& cfg) {
  const BehaviorSet behaviors = cfg.behavior_set();
  auto events = read_interactions_csv(interactions_csv, behaviors);
  std::map<std::string, int> catalog;
  for (const auto& ev : events) catalog[ev.item_id] = ev.category_id;
  events = filter_min_positive(std::move(events), cfg.dataset.min_positive);
  auto records = build_sessions(std::move(events), cfg.dataset.session_rule);
  auto lists = read_basic_lists(basic_lists_jsonl);
  std::vector<Session> sessions;
  sessions.reserve(records.size());
  for (const auto& rec : records) {
    Session s = assemble_candidates(rec, lists, catalog, behaviors, cfg.dataset.n_categories,
                                    cfg.dataset.top_m);
    normalize_and_impute(s.scores);
    sessions.push_back(std::move(s));
  }
  return SessionDataset(std::move(sessions));
}

}  // namespace intel
