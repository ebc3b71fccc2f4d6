#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "intel/config.hpp"
#include "intel/types.hpp"

namespace intel {

struct InteractionEvent {
  std::string user_id;
  std::string item_id;
  int category_id = 0;
  int level = 0;  // behavior level
  int64_t timestamp = 0;
  std::optional<std::string> visit_id;  // used by the "visit" session rule
};

// One basic model's ranked list for one session.
struct BasicList {
  std::vector<std::pair<std::string, double>> items;  // (item_id, score), rank order
};

struct BasicListFile {
  // session_id -> model_id -> list
  std::map<std::string, std::map<std::string, BasicList>> by_session;
  std::vector<std::string> model_ids;  // stable K ordering
};

// interactions.csv: header user_id,item_id,category_id,behavior,timestamp
// (optional trailing visit_id column enables the "visit" rule).
std::vector<InteractionEvent> read_interactions_csv(const std::string& path,
                                                    const BehaviorSet& behaviors);
void write_interactions_csv(const std::string& path, const std::vector<InteractionEvent>& events,
                            const BehaviorSet& behaviors, bool with_visit_id = false);

// basic_lists.jsonl: {"session_id": str, "model_id": str, "items": [...]}, one per line.
BasicListFile read_basic_lists(const std::string& path);
void write_basic_lists(const std::string& path, const BasicListFile& lists);

// Iteratively removes users and items with fewer than min_count positive
// interactions until a fixed point.
std::vector<InteractionEvent> filter_min_positive(std::vector<InteractionEvent> events,
                                                  int min_count = 3);

// Groups events into sessions (calendar-day or explicit visit id); sessions
// without a positive interaction are dropped. Session ids are
// "<user>:d<day>" or "<user>:v<visit>".
std::vector<SessionRecord> build_sessions(std::vector<InteractionEvent> events,
                                          const std::string& rule);

// Candidate set = union of each model's top_m items plus every positively
// interacted item; provenance recorded in the mask; levels from interactions.
// Throws MissingBasicList if a model list is absent for the session.
Session assemble_candidates(const SessionRecord& record, const BasicListFile& lists,
                            const std::map<std::string, int>& item_categories,
                            const BehaviorSet& behaviors, int n_categories, int top_m = 30);

// Per-column min-max normalization of masked entries to [0,1]; constant
// columns map to 0.5; unmasked entries are imputed with 0.
void normalize_and_impute(ScoreMatrix& scores);

// Counts positive interactions into (behavior, category) cells, normalized.
IntentDistribution compute_intent_gt(const SessionRecord& record, const BehaviorSet& behaviors,
                                     int n_categories);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

// Last 7 days -> test, previous 3 days -> validation, remainder -> train.
// Requires a span of at least 11 days and a non-empty validation slice.
SplitIndices temporal_split(const std::vector<Session>& sessions);

// Fully assembled dataset in canonical order (user_id, timestamp, session_id)
// with per-user history lookups.
class SessionDataset {
 public:
  explicit SessionDataset(std::vector<Session> sessions);
  SessionDataset() = default;

  const std::vector<Session>& sessions() const { return sessions_; }
  std::vector<Session>& sessions() { return sessions_; }

  // Up to `window` most recent same-user sessions strictly before `idx`,
  // oldest first.
  std::vector<int> history_of(int idx, int window) const;

  // Chronological positive interactions (behavior_index, category) across the
  // history window, truncated to the most recent `item_max`.
  std::vector<std::pair<int, int>> item_history_of(int idx, int window, int item_max) const;

 private:
  std::vector<Session> sessions_;
  std::map<std::string, std::vector<int>> by_user_;
};

// sessions.jsonl round trip.
void write_sessions_jsonl(const std::string& path, const std::vector<Session>& sessions);
std::vector<Session> read_sessions_jsonl(const std::string& path);

// Full ingest: csv + jsonl -> assembled sessions (filter, build, assemble,
// normalize, intent ground truth), in canonical order.
SessionDataset ingest(const std::string& interactions_csv, const std::string& basic_lists_jsonl,
                      const RunConfig& cfg);

}  // namespace intel
