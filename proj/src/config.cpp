#include "intel/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace intel {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvConfig KvConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::validation("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::stringstream ss(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error::validation("config line " + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error::validation("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error::validation("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.entries_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

void KvConfig::set(const std::string& dotted_key, const std::string& value) {
  entries_[dotted_key] = value;
}

bool KvConfig::has(const std::string& dotted_key) const { return entries_.count(dotted_key) > 0; }

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error::validation("config key '" + key + "' is not a number: " + it->second);
  }
}

int KvConfig::get_int(const std::string& key, int fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw Error::validation("config key '" + key + "' is not an integer: " + it->second);
  }
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw Error::validation("config key '" + key + "' is not an unsigned integer: " + it->second);
  }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error::validation("config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<int> KvConfig::get_int_list(const std::string& key, std::vector<int> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<int> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw Error::validation("config key '" + key + "' is an empty list");
  return out;
}

std::vector<uint64_t> KvConfig::get_u64_list(const std::string& key,
                                             std::vector<uint64_t> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<uint64_t> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(std::stoull(tok));
  }
  if (out.empty()) throw Error::validation("config key '" + key + "' is an empty list");
  return out;
}

double TrainConfig::effective_alpha() const {
  if (alpha >= 0.0) return alpha;
  if (loss == "pl") return 1e-4;
  return 1e-5;  // mse and bpr
}

RunConfig RunConfig::from_kv(const KvConfig& kv) {
  RunConfig c;
  c.dataset.behaviors = kv.get_string("dataset.behaviors", c.dataset.behaviors);
  c.dataset.n_categories = kv.get_int("dataset.n_categories", c.dataset.n_categories);
  c.dataset.session_rule = kv.get_string("dataset.session_rule", c.dataset.session_rule);
  c.dataset.top_m = kv.get_int("dataset.top_m", c.dataset.top_m);
  c.dataset.min_positive = kv.get_int("dataset.min_positive", c.dataset.min_positive);

  c.synthetic.n_users = kv.get_int("synthetic.n_users", c.synthetic.n_users);
  c.synthetic.n_items = kv.get_int("synthetic.n_items", c.synthetic.n_items);
  c.synthetic.n_categories = kv.get_int("synthetic.n_categories", c.synthetic.n_categories);
  c.synthetic.k_models = kv.get_int("synthetic.k_models", c.synthetic.k_models);
  c.synthetic.sessions_per_user = kv.get_int("synthetic.sessions_per_user", c.synthetic.sessions_per_user);
  c.synthetic.days = kv.get_int("synthetic.days", c.synthetic.days);
  c.synthetic.top_m = kv.get_int("synthetic.top_m", c.synthetic.top_m);
  c.synthetic.intent_drift = kv.get_double("synthetic.intent_drift", c.synthetic.intent_drift);
  c.synthetic.score_noise = kv.get_double("synthetic.score_noise", c.synthetic.score_noise);
  c.synthetic.context_effect = kv.get_double("synthetic.context_effect", c.synthetic.context_effect);
  c.synthetic.intent_concentration =
      kv.get_double("synthetic.intent_concentration", c.synthetic.intent_concentration);
  c.synthetic.seed = kv.get_u64("synthetic.seed", c.synthetic.seed);

  c.model.d_e = kv.get_int("model.d_e", c.model.d_e);
  c.model.d_int = kv.get_int("model.d_int", c.model.d_int);
  c.model.heads = kv.get_int("model.heads", c.model.heads);
  c.model.t_layers = kv.get_int("model.t_layers", c.model.t_layers);
  c.model.hidden = kv.get_int("model.hidden", c.model.hidden);
  c.model.intent_embed = kv.get_int("model.intent_embed", c.model.intent_embed);
  c.model.context_embed = kv.get_int("model.context_embed", c.model.context_embed);
  c.model.sequential_encoder = kv.get_string("model.sequential_encoder", c.model.sequential_encoder);
  c.model.history_window = kv.get_int("model.history_window", c.model.history_window);
  c.model.item_history_max = kv.get_int("model.item_history_max", c.model.item_history_max);
  c.model.weight_head = kv.get_string("model.weight_head", c.model.weight_head);
  c.model.pool_items = kv.get_bool("model.pool_items", c.model.pool_items);

  c.train.loss = kv.get_string("train.loss", c.train.loss);
  c.train.alpha = kv.get_double("train.alpha", c.train.alpha);
  c.train.gamma = kv.get_double("train.gamma", c.train.gamma);
  c.train.lr = kv.get_double("train.lr", c.train.lr);
  c.train.batch_size = kv.get_int("train.batch_size", c.train.batch_size);
  c.train.max_epochs = kv.get_int("train.max_epochs", c.train.max_epochs);
  c.train.patience = kv.get_int("train.patience", c.train.patience);
  c.train.seeds = kv.get_u64_list("train.seeds", c.train.seeds);
  c.train.intent_mode = kv.get_string("train.intent_mode", c.train.intent_mode);
  c.train.ablation = kv.get_string("train.ablation", c.train.ablation);
  c.train.grad_clip = kv.get_double("train.grad_clip", c.train.grad_clip);

  c.eval.ks = kv.get_int_list("eval.ks", c.eval.ks);
  c.eval.per_behavior_mode = kv.get_string("eval.per_behavior_mode", c.eval.per_behavior_mode);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto expect = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  try {
    BehaviorSet::parse(dataset.behaviors);
  } catch (const Error& e) {
    problems.push_back(std::string("dataset.behaviors: ") + e.what());
  }
  expect(dataset.n_categories >= 1, "dataset.n_categories must be >= 1");
  expect(dataset.session_rule == "day" || dataset.session_rule == "visit",
         "dataset.session_rule must be day|visit");
  expect(dataset.top_m >= 1, "dataset.top_m must be >= 1");
  expect(dataset.min_positive >= 1, "dataset.min_positive must be >= 1");
  expect(synthetic.n_users >= 1, "synthetic.n_users must be >= 1");
  expect(synthetic.n_items >= 1, "synthetic.n_items must be >= 1");
  expect(synthetic.n_categories >= 1, "synthetic.n_categories must be >= 1");
  expect(synthetic.k_models >= 2, "synthetic.k_models must be >= 2");
  expect(synthetic.sessions_per_user >= 1, "synthetic.sessions_per_user must be >= 1");
  expect(synthetic.days >= 12, "synthetic.days must be >= 12 (temporal split needs 11)");
  expect(synthetic.intent_drift >= 0.0 && synthetic.intent_drift <= 1.0,
         "synthetic.intent_drift must be in [0,1]");
  expect(synthetic.score_noise >= 0.0, "synthetic.score_noise must be >= 0");
  expect(synthetic.intent_concentration > 0.0, "synthetic.intent_concentration must be > 0");
  expect(model.d_e >= 1 && model.d_int >= 1 && model.hidden >= 1, "model dims must be >= 1");
  expect(model.heads >= 1 && model.d_e % model.heads == 0,
         "model.d_e must be divisible by model.heads");
  expect(model.t_layers >= 1, "model.t_layers must be >= 1");
  expect(model.sequential_encoder == "gru" || model.sequential_encoder == "attn",
         "model.sequential_encoder must be gru|attn");
  expect(model.history_window >= 1, "model.history_window must be >= 1");
  expect(model.item_history_max >= 1, "model.item_history_max must be >= 1");
  expect(model.weight_head == "simplex" || model.weight_head == "unconstrained",
         "model.weight_head must be simplex|unconstrained");
  expect(train.loss == "mse" || train.loss == "bpr" || train.loss == "pl",
         "train.loss must be mse|bpr|pl");
  expect(train.gamma >= 0.0, "train.gamma must be >= 0");
  expect(train.lr >= 0.0, "train.lr must be >= 0");
  expect(train.batch_size >= 1, "train.batch_size must be >= 1");
  expect(train.max_epochs >= 1, "train.max_epochs must be >= 1");
  expect(train.patience >= 1, "train.patience must be >= 1");
  expect(!train.seeds.empty(), "train.seeds must list at least one seed");
  expect(train.intent_mode == "learned" || train.intent_mode == "his_avg" ||
             train.intent_mode == "none",
         "train.intent_mode must be learned|his_avg|none");
  expect(train.ablation == "none" || train.ablation == "-Int" || train.ablation == "-I" ||
             train.ablation == "-S" || train.ablation == "-Cross" || train.ablation == "-Self",
         "train.ablation must be none|-Int|-I|-S|-Cross|-Self");
  for (int k : eval.ks) expect(k >= 1, "eval.ks entries must be >= 1");
  expect(eval.per_behavior_mode == "threshold" || eval.per_behavior_mode == "exact",
         "eval.per_behavior_mode must be threshold|exact");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) {
      if (!p.empty()) msg += "\n  - " + p;
    }
    throw Error::validation(msg);
  }
}

std::string RunConfig::fingerprint() const {
  std::stringstream ss;
  ss << dataset.behaviors << '|' << dataset.n_categories << '|' << model.d_e << '|' << model.d_int
     << '|' << model.heads << '|' << model.t_layers << '|' << model.hidden << '|'
     << model.intent_embed << '|' << model.context_embed << '|' << model.sequential_encoder << '|'
     << model.history_window << '|' << model.item_history_max << '|' << model.weight_head << '|'
     << model.pool_items << '|' << train.intent_mode << '|' << train.ablation;
  const std::string s = ss.str();
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace intel
