#pragma once

// Declarative run configuration. One JSON file describes a run; command-line
// overrides are dotted key paths applied to that JSON before validation.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "psyling/labels.hpp"
#include "psyling/models/train.hpp"
#include "psyling/stacking/stacking.hpp"

namespace psyling::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;  // keeps the config's model order
using nlohmann::ordered_json;

enum class Precision { Float32, Float64 };

/// One component model. Architecture widths not used by a kind are ignored.
struct ModelEntry {
  std::string id;
  models::ModelKind kind = models::ModelKind::Psyling;
  std::string embedding;  // key into PipelineConfig::embeddings; empty for psyling
  std::size_t hidden = 1024, layers = 4, ffn = 512;
  std::size_t emb_hidden = 256, feat_hidden = 512, fc = 128;
  double dropout = 0.2;
  models::TrainConfig train;

  models::ArchitectureSpec spec(std::size_t n_classes, std::size_t embed_dim) const {
    switch (kind) {
      case models::ModelKind::Baseline: return models::ArchitectureSpec::baseline(embedding, embed_dim, n_classes, hidden);
      case models::ModelKind::Psyling: return models::ArchitectureSpec::psyling(n_classes, hidden, layers, ffn, dropout);
      case models::ModelKind::Hybrid:
        return models::ArchitectureSpec::hybrid(embedding, embed_dim, n_classes, emb_hidden, feat_hidden, fc, dropout);
    }
    throw ConfigError("unknown model kind");
  }

  bool uses_features() const { return kind != models::ModelKind::Baseline; }

  ordered_json to_json() const {
    ordered_json j;
    j["kind"] = std::string(models::kind_name(kind));
    if (!embedding.empty()) j["embedding"] = embedding;
    if (kind == models::ModelKind::Baseline) j["hidden"] = hidden;
    if (kind == models::ModelKind::Psyling) {
      j["hidden"] = hidden;
      j["layers"] = layers;
      j["ffn"] = ffn;
    }
    if (kind == models::ModelKind::Hybrid) {
      j["emb_hidden"] = emb_hidden;
      j["feat_hidden"] = feat_hidden;
      j["fc"] = fc;
    }
    if (kind != models::ModelKind::Baseline) j["dropout"] = dropout;
    j["train"] = train.to_json();
    return j;
  }
};

struct PipelineConfig {
  std::string run_id = "run";
  fs::path output_dir = "runs";
  fs::path corpus;
  fs::path resources;
  std::map<std::string, fs::path> embeddings;
  std::vector<MhcLabel> exclude;
  int n_folds = 5;
  std::uint64_t fold_seed = 42;
  std::uint64_t seed = 1;
  Precision precision = Precision::Float32;
  std::size_t jobs = 1;
  std::vector<ModelEntry> models;
  std::vector<std::string> stack_components;
  stacking::MetaOptions meta;
  std::string ablate_model = "psyling";

  fs::path run_dir() const { return output_dir / run_id; }
  ClassSet classes() const { return ClassSet::excluding({exclude.begin(), exclude.end()}); }

  const ModelEntry& model(const std::string& id) const {
    for (const auto& m : models)
      if (m.id == id) return m;
    throw ConfigError("no model named '" + id + "' in config");
  }

  /// Fully resolved form; this is what a run directory records.
  ordered_json to_json() const {
    ordered_json j;
    j["run_id"] = run_id;
    j["output_dir"] = output_dir.string();
    j["corpus"] = corpus.string();
    j["resources"] = resources.string();
    ordered_json emb = ordered_json::object();
    for (const auto& [k, v] : embeddings) emb[k] = v.string();
    j["embeddings"] = emb;
    ordered_json ex = ordered_json::array();
    for (MhcLabel l : exclude) ex.push_back(std::string(label_name(l)));
    j["exclude_classes"] = ex;
    j["folds"] = {{"n", n_folds}, {"seed", fold_seed}};
    j["seed"] = seed;
    j["precision"] = precision == Precision::Float32 ? "float32" : "float64";
    j["jobs"] = jobs;
    ordered_json ms = ordered_json::object();
    for (const auto& m : models) ms[m.id] = m.to_json();
    j["models"] = ms;
    j["stack"] = {{"components", stack_components}, {"lambda", meta.lambda}, {"tol", meta.tol}, {"max_iter", meta.max_iter}};
    j["ablate"] = {{"model", ablate_model}};
    return j;
  }
};

/// The full-scale component set: two embedding baselines, Psyling-BiLSTM and the Hybrid.
inline json default_models_json() {
  return {{"bert", {{"kind", "baseline"}, {"embedding", "bert"}, {"hidden", 256}}},
          {"roberta", {{"kind", "baseline"}, {"embedding", "roberta"}, {"hidden", 256}}},
          {"psyling", {{"kind", "psyling"}, {"hidden", 1024}, {"layers", 4}, {"ffn", 512}, {"dropout", 0.2}}},
          {"hybrid",
           {{"kind", "hybrid"}, {"embedding", "roberta"}, {"emb_hidden", 256}, {"feat_hidden", 512}, {"fc", 128}, {"dropout", 0.2}}}};
}

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() || base.empty() ? q : base / q;
}

inline ModelEntry parse_model(const std::string& id, const json& j) {
  reject_unknown_keys(j, {"kind", "embedding", "hidden", "layers", "ffn", "emb_hidden", "feat_hidden", "fc", "dropout", "train"},
                      "models." + id);
  ModelEntry m;
  m.id = id;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "baseline") {
    m.kind = models::ModelKind::Baseline;
    m.hidden = 256;
  } else if (kind == "psyling") {
    m.kind = models::ModelKind::Psyling;
  } else if (kind == "hybrid") {
    m.kind = models::ModelKind::Hybrid;
  } else {
    throw ConfigError("models." + id + ".kind must be baseline, psyling or hybrid");
  }
  m.embedding = j.value("embedding", std::string());
  m.hidden = j.value("hidden", m.hidden);
  m.layers = j.value("layers", m.layers);
  m.ffn = j.value("ffn", m.ffn);
  m.emb_hidden = j.value("emb_hidden", m.emb_hidden);
  m.feat_hidden = j.value("feat_hidden", m.feat_hidden);
  m.fc = j.value("fc", m.fc);
  m.dropout = j.value("dropout", m.dropout);
  const json train = j.value("train", json::object());
  reject_unknown_keys(train, {"epochs", "batch_size", "seq_len", "lr", "beta1", "beta2", "eps", "weight_decay", "clip_norm", "seed"},
                      "models." + id + ".train");
  m.train = models::TrainConfig::from_json(train, models::TrainConfig::defaults_for(m.kind));
  if (m.kind != models::ModelKind::Psyling && m.embedding.empty())
    throw ConfigError("models." + id + " needs an 'embedding' source");
  return m;
}

}  // namespace detail

/// Sets a dotted key ("models.psyling.train.epochs") to a value; the value is
/// parsed as JSON when it parses, otherwise taken as a string.
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty key segment in override " + key);
    if (!node->is_object()) throw ConfigError("override " + key + " descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

/// Validates and resolves; relative paths are taken relative to base_dir.
inline PipelineConfig parse_config(const json& j, const fs::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(j, {"run_id", "output_dir", "corpus", "resources", "embeddings", "exclude_classes", "folds", "seed",
                                  "precision", "jobs", "models", "stack", "ablate"},
                              "config");
  PipelineConfig c;
  try {
    c.run_id = j.value("run_id", c.run_id);
    if (c.run_id.empty() || c.run_id.find_first_of("/\\") != std::string::npos || c.run_id == "." || c.run_id == "..")
      throw ConfigError("run_id must be a plain directory name");
    c.output_dir = detail::resolve(base_dir, j.value("output_dir", std::string("runs")));
    if (!j.contains("corpus")) throw ConfigError("config needs 'corpus'");
    if (!j.contains("resources")) throw ConfigError("config needs 'resources'");
    c.corpus = detail::resolve(base_dir, j.at("corpus").get<std::string>());
    c.resources = detail::resolve(base_dir, j.at("resources").get<std::string>());
    const json emb = j.value("embeddings", json::object());
    for (const auto& [k, v] : emb.items()) c.embeddings[k] = detail::resolve(base_dir, v.get<std::string>());
    for (const auto& name : j.value("exclude_classes", json::array())) {
      auto l = try_parse_label(name.get<std::string>());
      if (!l) throw ConfigError("exclude_classes: unknown class " + name.get<std::string>());
      c.exclude.push_back(*l);
    }
    const json folds = j.value("folds", json::object());
    detail::reject_unknown_keys(folds, {"n", "seed"}, "folds");
    c.n_folds = folds.value("n", c.n_folds);
    c.fold_seed = folds.value("seed", c.fold_seed);
    if (c.n_folds < 3) throw ConfigError("folds.n must be at least 3 (test, dev and training folds)");
    c.seed = j.value("seed", c.seed);
    const std::string prec = j.value("precision", std::string("float32"));
    if (prec == "float32") c.precision = Precision::Float32;
    else if (prec == "float64") c.precision = Precision::Float64;
    else throw ConfigError("precision must be float32 or float64");
    c.jobs = j.value("jobs", c.jobs);
    if (c.jobs == 0) throw ConfigError("jobs must be positive");

    const json ms = j.contains("models") ? j.at("models") : default_models_json();
    for (const auto& [id, mj] : ms.items()) c.models.push_back(detail::parse_model(id, mj));
    if (c.models.empty()) throw ConfigError("config defines no models");
    for (const auto& m : c.models)
      if (!m.embedding.empty() && !c.embeddings.count(m.embedding))
        throw ConfigError("models." + m.id + " reads embedding '" + m.embedding + "', which is not in 'embeddings'");

    const json st = j.value("stack", json::object());
    detail::reject_unknown_keys(st, {"components", "lambda", "tol", "max_iter"}, "stack");
    if (st.contains("components")) {
      c.stack_components = st.at("components").get<std::vector<std::string>>();
    } else {
      for (const auto& m : c.models) c.stack_components.push_back(m.id);
    }
    for (const auto& id : c.stack_components) c.model(id);
    c.meta.lambda = st.value("lambda", c.meta.lambda);
    c.meta.tol = st.value("tol", c.meta.tol);
    c.meta.max_iter = st.value("max_iter", c.meta.max_iter);

    const json ab = j.value("ablate", json::object());
    detail::reject_unknown_keys(ab, {"model"}, "ablate");
    c.ablate_model = ab.value("model", c.ablate_model);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.classes().size() < 2) throw ConfigError("fewer than two classes remain after exclusions");
  return c;
}

inline json read_config_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  return j;
}

inline PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides = {}) {
  json j = read_config_json(path);
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(j, path.parent_path());
}

}  // namespace psyling::pipeline
