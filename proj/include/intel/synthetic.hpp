#pragma once

#include <map>
#include <string>
#include <vector>

#include "intel/config.hpp"
#include "intel/data_pipeline.hpp"

namespace intel {

// Generator-side truth for one candidate item in one session.
struct SyntheticItemTruth {
  double utility_per_behavior[8] = {0};  // indexed by behavior_index (level-1)
  int driving_behavior = 0;              // behavior_index with max expected gain
};

struct SyntheticOutput {
  std::vector<InteractionEvent> events;
  BasicListFile basic_lists;
  SessionDataset dataset;  // assembled through the regular pipeline
  // session_id -> item_id -> truth (only for sessions that survived assembly)
  std::map<std::string, std::map<std::string, SyntheticItemTruth>> truth;
  // All-NDCG@3 on the test split, measured during generation:
  double oracle_ndcg3 = 0.0;
  std::vector<double> single_ndcg3;  // one per basic model
  double borda_ndcg3 = 0.0;
};

// Desk-scale dataset with drifting latent intents and behavior-specialized
// scorers. Generation is seed-deterministic and validates that oracle
// per-item weights (pick the scorer of each item's driving behavior) beat
// every single scorer on test All-NDCG@3.
SyntheticOutput generate_synthetic(const RunConfig& cfg);

// Writes interactions.csv, basic_lists.jsonl and sessions.jsonl.
void write_synthetic(const SyntheticOutput& out, const std::string& out_dir,
                     const BehaviorSet& behaviors);

}  // namespace intel
