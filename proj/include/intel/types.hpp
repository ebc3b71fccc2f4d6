#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace intel {

// Library-wide error type. `validation` maps to CLI exit code 1,
// `runtime` to exit code 2.
class Error : public std::runtime_error {
 public:
  enum class Kind { validation, runtime };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

  static Error validation(const std::string& msg) { return Error(Kind::validation, msg); }
  static Error runtime(const std::string& msg) { return Error(Kind::runtime, msg); }

 private:
  Kind kind_;
};

// One feedback type and its rank in the priority order. Level 0 is always
// Examine (exposure without positive feedback); higher level = stronger feedback.
struct BehaviorLevel {
  std::string name;
  int level = 0;
};

// The full priority ladder for a dataset, levels contiguous 0..L-1.
class BehaviorSet {
 public:
  BehaviorSet() = default;
  explicit BehaviorSet(std::vector<BehaviorLevel> levels);

  // Parses "Examine:0,Click:1,Buy:2".
  static BehaviorSet parse(const std::string& text);
  static BehaviorSet tmall();      // Examine<Click<Favorite<Buy
  static BehaviorSet two_level();  // Examine<Click<Buy

  int num_levels() const { return static_cast<int>(levels_.size()); }
  // Positive behaviors only (level >= 1); this is |B| in intent space.
  int num_positive() const { return num_levels() - 1; }
  const BehaviorLevel& at(int level) const;
  int level_of(const std::string& name) const;  // throws on unknown name
  const std::vector<BehaviorLevel>& levels() const { return levels_; }

 private:
  std::vector<BehaviorLevel> levels_;
};

struct ContextFeatures {
  int hour_of_day = 0;   // [0,24)
  int day_of_week = 0;   // [0,7)
  std::vector<double> extra;
};

struct CandidateItem {
  std::string item_id;
  int category_id = 0;  // [0, |I|)
};

// Per-session basic-model scores. values(n,k) is model k's score for
// candidate n; mask(n,k) tells whether model k actually proposed the item
// (false entries are imputed).
struct ScoreMatrix {
  std::vector<std::string> model_ids;          // K labels
  std::vector<std::vector<double>> values;     // N x K
  std::vector<std::vector<uint8_t>> mask;      // N x K

  int num_items() const { return static_cast<int>(values.size()); }
  int num_models() const { return static_cast<int>(model_ids.size()); }
};

// Multi-level relevance per candidate plus the derived priority ordering.
struct GroundTruth {
  std::vector<int> levels;     // length N
  std::vector<int> pi_order;   // permutation of 0..N-1, level desc, id asc
};

// Probability distribution over |I|*|B| cells; flat index is
// behavior_index * |I| + category_index with behavior_index in [0,|B|)
// counting positive behaviors from level 1 upward.
struct IntentDistribution {
  std::vector<double> probs;

  int dim() const { return static_cast<int>(probs.size()); }
  static int cell(int behavior_index, int category_index, int num_categories) {
    return behavior_index * num_categories + category_index;
  }
  static IntentDistribution uniform(int dim);
  bool is_valid(double tol = 1e-6) const;
};

// Per-item ensemble weights, one row per candidate on the K-simplex.
struct WeightMatrix {
  std::vector<std::vector<double>> values;  // N x K

  int num_items() const { return static_cast<int>(values.size()); }
  int num_models() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }
  bool rows_on_simplex(double tol = 1e-6) const;
  // max over models of the row-to-row weight range; the delta of Theorems 2-3.
  double spread() const;
};

struct EnsembleScores {
  std::vector<double> values;
};

struct SessionRecord {
  std::string session_id;
  std::string user_id;
  int64_t timestamp = 0;  // epoch seconds
  ContextFeatures context;
  std::vector<CandidateItem> candidates;
  std::vector<std::pair<std::string, int>> interactions;  // (item_id, level)
};

// A fully assembled per-session training/eval unit.
struct Session {
  SessionRecord record;
  ScoreMatrix scores;
  GroundTruth gt;
  IntentDistribution intent_gt;
};

// Sorts indices by level descending, ties broken by ascending item_id.
// Throws EmptySession on empty input.
std::vector<int> derive_pi_order(const std::vector<int>& levels,
                                 const std::vector<std::string>& item_ids);

}  // namespace intel
