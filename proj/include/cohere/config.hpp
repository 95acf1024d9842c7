#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cohere/corpus.hpp"
#include "cohere/errors.hpp"
#include "cohere/evalproto.hpp"

namespace cohere {

// Flat key-value config with [section] headers. Keys keep their spelling
// (the appendix-style parameter names contain spaces); lookup is
// case-insensitive on the key.
struct ConfigFile {
  // section -> key -> value
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return false;
    return s->second.count(normalize_key(key)) > 0;
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    auto k = s->second.find(normalize_key(key));
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const {
    return get(section, key).value_or(fallback);
  }

  static std::string normalize_key(const std::string& key) {
    std::string out;
    for (char c : key) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
  }
};

namespace configdet {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace configdet

inline ConfigFile parse_config(std::istream& in) {
  ConfigFile cfg;
  std::string line, section = "global";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = configdet::trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[' && text.back() == ']') {
      section = ConfigFile::normalize_key(configdet::trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = ConfigFile::normalize_key(configdet::trim(text.substr(0, eq)));
    const std::string value = configdet::trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.sections[section][key] = value;
  }
  return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// RunConfig: the validated, typed view of a config file.

struct RunConfig {
  std::map<Domain, std::string> train_paths;
  std::map<Domain, std::string> test_paths;
  ColumnMap columns;
  std::string sidecar_path;
  EntityMode entity_mode = EntityMode::IdenticalNoun;

  std::string embeddings_path;
  int embedding_dim = 300;

  ModelSpec model;
  std::optional<double> fixed_threshold1;
  std::optional<double> fixed_threshold2;

  Task task = Task::Classify3;
  RaterSource labels = RaterSource::Expert;
  int n_seeds = 10;
  std::uint64_t master_seed = 1;
  int permutation_count = 20;
  std::vector<Domain> domains = {Domain::Yahoo, Domain::Clinton, Domain::Enron, Domain::Yelp};
  bool cross_domain = false;
  bool combined = false;

  std::string out_dir = "out";
};

namespace configdet {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "yes" || v == "on" || v == "true" || v == "1") return true;
  if (v == "no" || v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

inline int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos == v.size()) return x;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size()) return x;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// Accepted [model] keys per model kind, appendix parameter names verbatim.
inline const std::map<ModelKind, std::set<std::string>>& accepted_model_keys() {
  static const std::map<ModelKind, std::set<std::string>> keys = {
      {ModelKind::Majority, {}},
      {ModelKind::Baseline, {"threshold1", "threshold2"}},
      {ModelKind::EGrid, {"sequence length", "salience threshold", "syntax", "trees"}},
      {ModelKind::EGraph, {"graph type", "distance", "threshold1", "threshold2"}},
      {ModelKind::EGridConv,
       {"dropout", "filter", "window", "pool", "batch", "embedding size"}},
      {ModelKind::LexGraph, {"threshold", "k", "trees"}},
      {ModelKind::Clique, {"dropout", "lstm dim", "hidden dim", "window size", "batch"}},
      {ModelKind::SentAvg, {"dropout", "lstm dim", "hidden dim", "batch"}},
      {ModelKind::ParSeq, {"dropout", "lstm dim", "hidden dim", "batch"}},
      {ModelKind::SentSeq, {"dropout", "lstm dim", "hidden dim", "batch"}}};
  return keys;
}

}  // namespace configdet

inline RunConfig build_run_config(const ConfigFile& cfg) {
  using namespace configdet;
  RunConfig rc;

  // [corpus]
  for (Domain d : {Domain::Yahoo, Domain::Clinton, Domain::Enron, Domain::Yelp}) {
    const std::string name = ConfigFile::normalize_key(domain_name(d));
    if (auto v = cfg.get("corpus", name + "_train")) rc.train_paths[d] = *v;
    if (auto v = cfg.get("corpus", name + "_test")) rc.test_paths[d] = *v;
  }
  if (auto v = cfg.get("corpus", "column_text_id")) rc.columns.text_id = *v;
  if (auto v = cfg.get("corpus", "column_body")) rc.columns.body = *v;
  if (auto v = cfg.get("corpus", "expert_columns"))
    rc.columns.expert = *v == "none" ? std::vector<std::string>{} : split_list(*v);
  if (auto v = cfg.get("corpus", "crowd_columns"))
    rc.columns.crowd = *v == "none" ? std::vector<std::string>{} : split_list(*v);
  if (auto v = cfg.get("corpus", "sidecar")) rc.sidecar_path = *v;
  if (auto v = cfg.get("corpus", "entity_mode")) {
    if (*v == "identical_noun") rc.entity_mode = EntityMode::IdenticalNoun;
    else if (*v == "sidecar_coref") rc.entity_mode = EntityMode::SidecarCoref;
    else throw ConfigError("config: entity_mode must be identical_noun or sidecar_coref");
  }

  // [embeddings]; environment variable supplies the default path
  if (const char* env = std::getenv("COHERE_EMBEDDINGS")) rc.embeddings_path = env;
  if (auto v = cfg.get("embeddings", "path")) rc.embeddings_path = *v;
  if (auto v = cfg.get("embeddings", "dim")) rc.embedding_dim = parse_int(*v, "dim");
  rc.model.nn.embedding_dim = rc.embedding_dim;

  // [model]
  if (auto v = cfg.get("model", "model")) {
    const auto kind = model_kind_from_name(*v);
    if (!kind) throw ConfigError("config: unknown model '" + *v + "'");
    rc.model.kind = *kind;
  }
  if (auto section = cfg.sections.find("model"); section != cfg.sections.end()) {
    const auto& accepted = configdet::accepted_model_keys().at(rc.model.kind);
    for (const auto& [key, value] : section->second) {
      if (key == "model") continue;
      if (!accepted.count(key)) {
        std::string allowed;
        for (const auto& k : accepted) allowed += (allowed.empty() ? "" : ", ") + k;
        throw ConfigError("config: parameter '" + key + "' not valid for model '" +
                          model_kind_name(rc.model.kind) + "' (accepted: " + allowed + ")");
      }
      if (key == "sequence length") rc.model.sequence_length = parse_int(value, key);
      else if (key == "salience threshold")
        rc.model.salience_threshold =
            value == "off" ? std::nullopt : std::optional<int>(parse_int(value, key));
      else if (key == "syntax") rc.model.syntax = parse_bool(value, key);
      else if (key == "graph type") {
        if (value == "u") rc.model.graph_type = GraphMode::Unweighted;
        else if (value == "w") rc.model.graph_type = GraphMode::SharedCount;
        else if (value == "syn") rc.model.graph_type = GraphMode::Syntactic;
        else throw ConfigError("config: graph type must be u, w, or syn");
      } else if (key == "distance") rc.model.distance = parse_bool(value, key);
      else if (key == "threshold1") rc.fixed_threshold1 = parse_double(value, key);
      else if (key == "threshold2") rc.fixed_threshold2 = parse_double(value, key);
      else if (key == "threshold") rc.model.sim_threshold = parse_double(value, key);
      else if (key == "k") rc.model.subgraph_k = parse_int(value, key);
      else if (key == "trees") rc.model.n_trees = parse_int(value, key);
      else if (key == "dropout") rc.model.nn.dropout = parse_double(value, key);
      else if (key == "lstm dim") rc.model.nn.lstm_dim = parse_int(value, key);
      else if (key == "hidden dim") rc.model.nn.hidden_dim = parse_int(value, key);
      else if (key == "window size") rc.model.nn.window_size = parse_int(value, key);
      else if (key == "filter") rc.model.nn.conv_filters = parse_int(value, key);
      else if (key == "window") rc.model.nn.conv_window = parse_int(value, key);
      else if (key == "pool") rc.model.nn.pool_length = parse_int(value, key);
      else if (key == "batch") {
        rc.model.nn.batch_size = parse_int(value, key);
        rc.model.train_options.batch_size = rc.model.nn.batch_size;
      } else if (key == "embedding size") rc.model.nn.role_dim = parse_int(value, key);
    }
  }

  // [train]
  if (auto v = cfg.get("train", "epochs")) rc.model.train_options.max_epochs = parse_int(*v, "epochs");
  if (auto v = cfg.get("train", "batch")) rc.model.train_options.batch_size = parse_int(*v, "batch");
  if (auto v = cfg.get("train", "lr")) rc.model.train_options.lr = parse_double(*v, "lr");
  if (auto v = cfg.get("train", "patience")) rc.model.train_options.patience = parse_int(*v, "patience");

  // [task]
  if (auto v = cfg.get("task", "task")) {
    const auto t = task_from_name(*v);
    if (!t) throw ConfigError("config: unknown task '" + *v + "'");
    rc.task = *t;
  }
  if (auto v = cfg.get("task", "labels")) {
    if (*v == "expert") rc.labels = RaterSource::Expert;
    else if (*v == "crowd") rc.labels = RaterSource::Crowd;
    else throw ConfigError("config: labels must be expert or crowd");
  }
  if (auto v = cfg.get("task", "seeds")) rc.n_seeds = parse_int(*v, "seeds");
  if (auto v = cfg.get("task", "master_seed")) rc.master_seed = parse_int(*v, "master_seed");
  if (auto v = cfg.get("task", "permutations")) rc.permutation_count = parse_int(*v, "permutations");
  if (auto v = cfg.get("task", "cross_domain")) rc.cross_domain = parse_bool(*v, "cross_domain");
  if (auto v = cfg.get("task", "combined")) rc.combined = parse_bool(*v, "combined");
  if (auto v = cfg.get("task", "domains")) {
    rc.domains.clear();
    for (const auto& name : split_list(*v)) {
      const auto d = domain_from_name(name);
      if (!d) throw ConfigError("config: unknown domain '" + name + "'");
      rc.domains.push_back(*d);
    }
    if (rc.domains.empty()) throw ConfigError("config: empty domain list");
  }

  // [output]
  if (auto v = cfg.get("output", "dir")) rc.out_dir = *v;
  return rc;
}

}  // namespace cohere
