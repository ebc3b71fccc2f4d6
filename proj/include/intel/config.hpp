#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "intel/types.hpp"

namespace intel {

// Flat view of an INI-style config file: "[section]" headers and key = value
// lines, addressed as "section.key". '#' and ';' start comments.
class KvConfig {
 public:
  static KvConfig load(const std::string& path);
  static KvConfig parse(const std::string& text);

  void set(const std::string& dotted_key, const std::string& value);
  bool has(const std::string& dotted_key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;
  std::vector<uint64_t> get_u64_list(const std::string& key, std::vector<uint64_t> fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct DatasetConfig {
  std::string behaviors = "Examine:0,Click:1,Buy:2";
  int n_categories = 8;
  std::string session_rule = "day";  // day | visit
  int top_m = 30;
  int min_positive = 3;
};

struct SyntheticConfig {
  int n_users = 2000;
  int n_items = 5000;
  int n_categories = 8;
  int k_models = 2;
  int sessions_per_user = 6;
  int days = 30;
  int top_m = 12;
  double intent_drift = 0.15;
  double score_noise = 0.6;
  double context_effect = 1.2;
  double intent_concentration = 0.35;
  uint64_t seed = 17;
};

struct ModelConfig {
  int d_e = 16;
  int d_int = 8;
  int heads = 2;
  int t_layers = 1;
  int hidden = 128;
  int intent_embed = 16;
  int context_embed = 8;
  std::string sequential_encoder = "gru";  // gru | attn
  int history_window = 20;
  int item_history_max = 100;
  std::string weight_head = "simplex";  // simplex | unconstrained
  bool pool_items = false;              // list-level weights (aWELv regime)
};

struct TrainConfig {
  std::string loss = "mse";  // mse | bpr | pl
  double alpha = -1.0;       // < 0 picks the per-family default
  double gamma = 0.1;
  double lr = 3e-3;
  int batch_size = 512;
  int max_epochs = 100;
  int patience = 10;
  std::vector<uint64_t> seeds = {42};
  std::string intent_mode = "learned";  // learned | his_avg | none
  std::string ablation = "none";        // none | -Int | -I | -S | -Cross | -Self
  double grad_clip = 5.0;

  double effective_alpha() const;
};

struct EvalSettings {
  std::vector<int> ks = {3, 5, 10};
  std::string per_behavior_mode = "threshold";  // threshold | exact
};

struct RunConfig {
  DatasetConfig dataset;
  SyntheticConfig synthetic;
  ModelConfig model;
  TrainConfig train;
  EvalSettings eval;

  static RunConfig from_kv(const KvConfig& kv);
  void validate() const;
  BehaviorSet behavior_set() const { return BehaviorSet::parse(dataset.behaviors); }
  // Stable hash of every field that must match between a checkpoint and the
  // config used to evaluate it.
  std::string fingerprint() const;
};

}  // namespace intel
